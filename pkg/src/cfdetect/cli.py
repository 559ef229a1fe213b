"""Command-line interface: ingest, features, select, experiment, ablate,
score, and figures, with CSV reports plus a JSON run manifest."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .corpus import LabeledSet, LabelSetupKind, apply_label_setup, load_corpus
from .features import FeatureGroup
from .harness import (ExperimentConfig, Modality, SelectionMode,
                      build_image_source, build_text_source,
                      run_ablation, run_ensemble_experiment, run_label3,
                      run_modality_experiment)
from .harness.figures import FigureKind, export_figure_data
from .harness.reports import (config_payload, file_sha256, write_manifest,
                              write_samples_csv, write_summary_csv)
from .learn import (ClassifierKind, ClassifierSpec, fit_classifier, load_model,
                    predict_proba, save_model)
from .select import SelectionTest, export_mask_csv, select_significant
from .text import TextProviders, assemble_text_features
from .text.tfidf import tfidf_fit

_CLASSIFIER_NAMES = {
    "knn": ClassifierKind.KNN,
    "naive-bayes": ClassifierKind.GAUSSIAN_NB,
    "decision-tree": ClassifierKind.DECISION_TREE,
    "random-forest": ClassifierKind.RANDOM_FOREST,
    "adaboost": ClassifierKind.ADABOOST_STUMPS,
    "mlp": ClassifierKind.MLP,
}

_LABEL_SETUPS = {"I": LabelSetupKind.LABEL_I, "II": LabelSetupKind.LABEL_II,
                 "III": LabelSetupKind.LABEL_III}


def _read_config_file(path) -> dict[str, str]:
    """key=value lines; blank lines and #-comments ignored."""
    options: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"bad config line (expected key=value): {raw!r}")
        key, value = line.split("=", 1)
        options[key.strip()] = value.strip()
    return options


def _load_labeled(corpus, setup: LabelSetupKind):
    return apply_label_setup(corpus, corpus.scores(), setup)


def _write_matrix_csv(matrix, path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", *matrix.names])
        for i, cid in enumerate(matrix.ids):
            writer.writerow([cid, *(repr(float(v)) for v in matrix.values[i])])


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value file; values act as option defaults")
@click.option("--out", "out_dir", type=click.Path(), default="out",
              help="output directory for reports")
@click.pass_context
def main(ctx, config_path, out_dir):
    """Fraud classification toolkit for crowdfunding campaigns."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _read_config_file(config_path) if config_path else {}
    ctx.obj["out"] = Path(out_dir)


def _out_dir(ctx) -> Path:
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cfg(ctx, key, fallback):
    return ctx.obj["config"].get(key, fallback)


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.pass_context
def ingest(ctx, corpus_path):
    """Validate a JSONL corpus and report retained/skipped campaigns."""
    corpus = load_corpus(corpus_path)
    out = _out_dir(ctx)
    report = {
        "retained": len(corpus),
        "skipped": [
            {"line": rec.line_no, "id": rec.campaign_id, "reason": rec.reason}
            for rec in corpus.skipped
        ],
    }
    path = out / "ingest_report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"retained {len(corpus)} campaigns, skipped {len(corpus.skipped)}")
    click.echo(f"report: {path}")


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--modality", type=click.Choice(["text", "image"]), required=True)
@click.option("--sidecars", "sidecar_dir", type=click.Path(), default=None,
              help="sidecar directory (image modality)")
@click.option("--min-df", type=int, default=2, show_default=True)
@click.pass_context
def features(ctx, corpus_path, modality, sidecar_dir, min_df):
    """Assemble a feature matrix and write it as CSV."""
    corpus = load_corpus(corpus_path)
    out = _out_dir(ctx)
    if modality == "text":
        source = build_text_source(corpus, min_df=min_df)
        matrix = source.full_matrix()
    else:
        if not sidecar_dir:
            raise click.ClickException("--sidecars is required for the image modality")
        source, missing = build_image_source(corpus, sidecar_dir)
        matrix = source.full_matrix()
        if missing:
            click.echo(f"campaigns without images: {len(missing)}", err=True)
    path = out / f"{modality}_features.csv"
    _write_matrix_csv(matrix, path)
    click.echo(f"{matrix.values.shape[0]} campaigns x {matrix.n_features} features -> {path}")


@main.command("select")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--modality", type=click.Choice(["text", "image"]), default="text", show_default=True)
@click.option("--sidecars", "sidecar_dir", type=click.Path(), default=None)
@click.option("--test", "test_name", type=click.Choice(["ks", "welch"]), default="ks", show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--label-setup", type=click.Choice(["I", "II"]), default="II", show_default=True)
@click.pass_context
def select_cmd(ctx, corpus_path, modality, sidecar_dir, test_name, alpha, label_setup):
    """Significance-filter features against the binary label; export the mask."""
    corpus = load_corpus(corpus_path)
    labeled, _ = _load_labeled(corpus, _LABEL_SETUPS[label_setup])
    if modality == "text":
        source = build_text_source(corpus)
    else:
        if not sidecar_dir:
            raise click.ClickException("--sidecars is required for the image modality")
        source, _ = build_image_source(corpus, sidecar_dir)
    kept_ids = [cid for cid in source.ids if cid in set(labeled.ids())]
    matrix = source.full_matrix().take_rows(kept_ids)
    mask = select_significant(matrix, labeled, SelectionTest(test_name), alpha)
    out = _out_dir(ctx)
    path = export_mask_csv(mask, out / f"{modality}_selection.csv")
    click.echo(f"kept {len(mask.kept_indices())} of {len(mask)} features -> {path}")


def _experiment_config(ctx, label_setup, classifier, iterations, seed, selection,
                       modality, train_fraction, alpha) -> ExperimentConfig:
    cfg = ctx.obj["config"]
    spec = ClassifierSpec(kind=_CLASSIFIER_NAMES[classifier])
    return ExperimentConfig(
        classifier=spec,
        label_setup=_LABEL_SETUPS[label_setup],
        modality=Modality(modality),
        iterations=iterations,
        train_fraction=float(cfg.get("train_fraction", train_fraction)),
        master_seed=seed,
        selection_mode=SelectionMode.LEAK_FREE if selection == "leak-free"
        else SelectionMode.FULL_DATASET,
        alpha=float(cfg.get("alpha", alpha)),
    )


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--sidecars", "sidecar_dir", type=click.Path(), default=None)
@click.option("--label-setup", type=click.Choice(["I", "II", "III"]), default="II", show_default=True)
@click.option("--classifier", type=click.Choice(sorted(_CLASSIFIER_NAMES)), default="random-forest",
              show_default=True)
@click.option("--modality", type=click.Choice(["text", "image", "ensemble"]), default="text",
              show_default=True)
@click.option("--iterations", type=int, default=None, help="default: 2000 classical / 1000 MLP")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--selection", type=click.Choice(["leak-free", "paper"]), default="leak-free",
              show_default=True)
@click.option("--train-fraction", type=float, default=0.7, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--save-model", "model_path", type=click.Path(), default=None,
              help="also fit one model on the full labeled corpus and save it")
@click.pass_context
def experiment(ctx, corpus_path, sidecar_dir, label_setup, classifier, modality,
               iterations, seed, selection, train_fraction, alpha, model_path):
    """Run the balanced-iteration protocol and write reports."""
    corpus = load_corpus(corpus_path)
    config = _experiment_config(ctx, label_setup, classifier, iterations, seed,
                                selection, modality, train_fraction, alpha)
    out = _out_dir(ctx)

    needs_image = modality in ("image", "ensemble")
    if needs_image and not sidecar_dir:
        raise click.ClickException("--sidecars is required for image/ensemble runs")

    text_source = build_text_source(corpus) if modality in ("text", "ensemble") else None
    image_source = build_image_source(corpus, sidecar_dir)[0] if needs_image else None

    if label_setup == "III":
        (train_pool, test_set), _ = apply_label_setup(corpus, corpus.scores(),
                                                      LabelSetupKind.LABEL_III)
        source = text_source if modality != "image" else image_source
        dist = run_label3(source, train_pool, test_set, config,
                          image_source=image_source if modality == "ensemble" else None)
        results = {f"label3_{modality}_{classifier}": dist}
    else:
        labeled, _ = _load_labeled(corpus, config.label_setup)
        if modality == "ensemble":
            bundle = run_ensemble_experiment(text_source, image_source, labeled, config)
            results = {
                f"text_{classifier}": bundle.text,
                f"image_{classifier}": bundle.image,
                f"ensemble_{classifier}": bundle.ensemble,
            }
        else:
            source = text_source if modality == "text" else image_source
            dist = run_modality_experiment(source, labeled, config)
            results = {f"{modality}_{classifier}": dist}

    write_summary_csv(results, out / "summary.csv")
    for run_name, dist in results.items():
        write_samples_csv(dist, out / f"samples_{run_name}.csv")
    hashes = {"corpus": file_sha256(corpus_path)}
    write_manifest(config, hashes, out / "manifest.json")

    if model_path:
        labeled, _ = _load_labeled(corpus, LabelSetupKind.LABEL_II
                                   if label_setup == "III" else config.label_setup)
        bundle_modality = "image" if modality == "image" else "text"
        source = image_source if bundle_modality == "image" else text_source
        _save_scoring_bundle(source, labeled, config, seed, bundle_modality,
                             corpus, model_path)
        click.echo(f"model saved: {model_path}")

    for run_name, dist in results.items():
        mean_auc, std_auc = dist.summary()["auc"]
        click.echo(f"{run_name}: mean AUC {mean_auc:.4f} (std {std_auc:.4f}) "
                   f"over {len(dist)} iterations")
    click.echo(f"reports in {out}")


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--sidecars", "sidecar_dir", type=click.Path(), required=True)
@click.option("--classifier", type=click.Choice(sorted(_CLASSIFIER_NAMES)), default="random-forest",
              show_default=True)
@click.option("--iterations", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--groups", default=None,
              help="comma-separated feature groups (default: all nine)")
@click.pass_context
def ablate(ctx, corpus_path, sidecar_dir, classifier, iterations, seed, groups):
    """Leave-one-group-out ablation over the ensemble."""
    corpus = load_corpus(corpus_path)
    labeled, _ = _load_labeled(corpus, LabelSetupKind.LABEL_II)
    config = ExperimentConfig(
        classifier=ClassifierSpec(kind=_CLASSIFIER_NAMES[classifier]),
        modality=Modality.ENSEMBLE,
        iterations=iterations,
        master_seed=seed,
    )
    text_source = build_text_source(corpus)
    image_source = build_image_source(corpus, sidecar_dir)[0]
    wanted = ([FeatureGroup(g.strip()) for g in groups.split(",")]
              if groups else list(FeatureGroup))
    rows = run_ablation(text_source, image_source, labeled, config, wanted)

    out = _out_dir(ctx)
    import csv

    path = out / "ablation.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left_out", "mean_auc", "std_auc", "delta_mean_auc"])
        for row in rows:
            writer.writerow([
                row.left_out.value if row.left_out else "none",
                repr(row.distribution.mean("auc")),
                repr(row.distribution.std("auc")),
                repr(row.delta_mean_auc),
            ])
    click.echo(f"ablation table -> {path}")


def _save_scoring_bundle(source, labeled, config, seed, bundle_modality,
                         corpus, model_path):
    """Fit one model on the full labeled corpus and save it with everything
    needed to featurize a fresh campaign (the TF-IDF vocabulary)."""
    from .learn import model_payload

    ids = [cid for cid in source.ids if cid in set(labeled.ids())]
    # fold_matrix fits the vocabulary on exactly the labeled campaigns, so
    # the stored vocabulary reproduces the training schema at scoring time.
    matrix = source.fold_matrix(ids).take_rows(ids)
    mask = select_significant(matrix, labeled, config.selection_test, config.alpha)
    kept = mask.kept_indices() or [0]
    selected = matrix.take_columns(kept)
    model = fit_classifier(config.classifier.with_seed(seed), selected, labeled)

    bundle = {"bundle_version": 1, "modality": bundle_modality,
              "model": model_payload(model), "vocabulary": None}
    if bundle_modality == "text":
        vocab = tfidf_fit([c.description for c in corpus
                           if c.id in set(labeled.ids())], min_df=2)
        bundle["vocabulary"] = {
            "terms": list(vocab.terms),
            "document_frequency": list(vocab.document_frequency),
            "n_documents": vocab.n_documents,
        }
    Path(model_path).write_text(json.dumps(bundle, sort_keys=True), encoding="utf-8")


def _bundle_probability(bundle_path, campaign, sidecar_dir) -> float | None:
    from .features import FeatureVector
    from .imagefeat import assemble_image_features, image_feature_names
    from .learn import model_from_payload
    from .text.tfidf import TfidfVocabulary

    bundle = json.loads(Path(bundle_path).read_text(encoding="utf-8"))
    if bundle.get("bundle_version") != 1:
        raise click.ClickException(f"unsupported model bundle: {bundle_path}")
    model = model_from_payload(bundle["model"])

    if bundle["modality"] == "text":
        raw = bundle.get("vocabulary") or {"terms": [], "document_frequency": [],
                                           "n_documents": 1}
        vocab = TfidfVocabulary(tuple(raw["terms"]),
                                tuple(raw["document_frequency"]),
                                int(raw["n_documents"]))
        vector = assemble_text_features(campaign, TextProviders(), vocab)
    else:
        if not sidecar_dir:
            raise click.ClickException("--sidecars is required for image models")
        agg = assemble_image_features(campaign, sidecar_dir)
        if agg.missing:
            return None
        vector = FeatureVector(image_feature_names(), agg.values)

    index = {n: i for i, n in enumerate(vector.names)}
    try:
        wanted = [index[n] for n in model.feature_names]
    except KeyError as exc:
        raise click.ClickException(f"model feature missing from assembly: {exc}")
    return predict_proba(model, FeatureVector(model.feature_names,
                                              vector.values[wanted]))


@main.command()
@click.option("--campaign", "campaign_path", type=click.Path(exists=True), required=True,
              help="single-campaign JSONL file")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True,
              help="text model bundle from experiment --save-model")
@click.option("--image-model", "image_model_path", type=click.Path(exists=True), default=None)
@click.option("--sidecars", "sidecar_dir", type=click.Path(), default=None)
@click.pass_context
def score(ctx, campaign_path, model_path, image_model_path, sidecar_dir):
    """Fraud probability for one campaign, printed to stdout."""
    from .harness import ensemble_combine

    corpus = load_corpus(campaign_path)
    if len(corpus) != 1:
        raise click.ClickException(f"expected exactly 1 campaign, found {len(corpus)}")
    campaign = corpus.campaigns[0]

    text_p = _bundle_probability(model_path, campaign, sidecar_dir)
    image_p = (_bundle_probability(image_model_path, campaign, sidecar_dir)
               if image_model_path else None)
    click.echo(repr(ensemble_combine(text_p, image_p)))


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--sidecars", "sidecar_dir", type=click.Path(), default=None)
@click.option("--kind", type=click.Choice([k.value for k in FigureKind]), required=True)
@click.option("--label-setup", type=click.Choice(["I", "II"]), default="II", show_default=True)
@click.pass_context
def figures(ctx, corpus_path, sidecar_dir, kind, label_setup):
    """Export the CSV data behind one figure."""
    corpus = load_corpus(corpus_path)
    labeled, _ = _load_labeled(corpus, _LABEL_SETUPS[label_setup])
    figure_kind = FigureKind(kind)
    out = _out_dir(ctx)
    path = out / f"figure_{figure_kind.value}.csv"

    kwargs = {"labeled": labeled}
    if figure_kind in (FigureKind.TEXT_EMOTIONS, FigureKind.WORD_IMPORTANCE):
        kwargs["text_matrix"] = build_text_source(corpus).full_matrix()
    elif figure_kind in (FigureKind.IMAGE_EMOTIONS, FigureKind.OBJECT_PREVALENCE,
                         FigureKind.FACE_HISTOGRAM):
        if not sidecar_dir:
            raise click.ClickException("--sidecars is required for image figures")
        kwargs["image_matrix"] = build_image_source(corpus, sidecar_dir)[0].full_matrix()
    else:
        raise click.ClickException(
            "MetricsBoxes is produced from experiment outputs; run `experiment` "
            "and point plotting at the samples CSVs instead")
    export_figure_data(figure_kind, path, **kwargs)
    click.echo(f"figure data -> {path}")


if __name__ == "__main__":
    main()
