"""Sentiment, readability, form, and NER extractors."""

from __future__ import annotations

import numpy as np
import pytest

from cfdetect.text.form import form_descriptors, word_shape
from cfdetect.text.ner import EntitySpan, RuleTagger, ner_counts
from cfdetect.text.readability import readability_profile
from cfdetect.text.resources import load_data
from cfdetect.text.sentiment import (EMOTIONS, TONES, LexiconSentimentProvider,
                                     ProviderError, SentimentToneProfile,
                                     sentiment_tone)
from cfdetect.text.tokenize import count_syllables, sentences, word_tokens


class TestTokenizer:
    def test_word_tokens_keep_contractions(self):
        assert word_tokens("Don't stop-me now") == ["Don't", "stop-me", "now"]

    def test_sentences_split_on_terminators_and_newlines(self):
        assert len(sentences("One here. Two there! Three?\nFour")) == 4

    @pytest.mark.parametrize("word,expected", [
        ("cat", 1), ("hello", 2), ("beautiful", 3), ("mate", 1),
        ("table", 2), ("free", 1), ("the", 1), ("readability", 5),
    ])
    def test_syllable_list(self, word, expected):
        assert count_syllables(word) == expected


class TestSentiment:
    def test_joy_only_text_makes_joy_the_strict_argmax(self):
        # Oracle: recount hits directly from the shipped lexicon file.
        lexicon = load_data("sentiment_lexicon.json")
        joy_words = [w for w in lexicon["emotions"]["joy"]
                     if all(w not in lexicon["emotions"][e]
                            for e in lexicon["emotions"] if e != "joy")][:6]
        text = " ".join(joy_words)
        profile = sentiment_tone(text, LexiconSentimentProvider())

        tokens = [t.lower() for t in word_tokens(text)]
        expected = {
            emo: min(1.0, sum(t in set(lexicon["emotions"][emo]) for t in tokens) / len(tokens))
            for emo in EMOTIONS
        }
        for emo, value in zip(EMOTIONS, profile.emotions):
            assert value == pytest.approx(expected[emo])
        joy_index = EMOTIONS.index("joy")
        for i, value in enumerate(profile.emotions):
            if i != joy_index:
                assert profile.emotions[joy_index] > value

    def test_no_lexicon_hits_gives_all_zero(self):
        profile = sentiment_tone("zorp blick quandary mx", LexiconSentimentProvider())
        assert profile.emotions == (0.0,) * 5
        assert profile.tones == (0.0,) * 7

    def test_stub_provider_passes_through_verbatim(self):
        fixed = SentimentToneProfile(emotions=(0.1, 0.2, 0.3, 0.4, 0.5),
                                     tones=(0.7,) * 7)

        class Stub:
            def score(self, text):
                return fixed

        assert sentiment_tone("anything at all", Stub()) is fixed

    def test_scores_stay_in_unit_interval(self):
        text = "happy happy happy joy joy celebrate wonderful amazing"
        profile = sentiment_tone(text, LexiconSentimentProvider())
        for v in (*profile.emotions, *profile.tones):
            assert 0.0 <= v <= 1.0

    def test_http_provider_uses_stub_session_and_cache(self, tmp_path, monkeypatch):
        from cfdetect.text.sentiment import HttpSentimentProvider

        calls = []

        class FakeResponse:
            status_code = 200

            def json(self):
                return {"emotions": {e: 0.25 for e in EMOTIONS},
                        "tones": {t: 0.5 for t in TONES}}

        class FakeSession:
            def post(self, url, json=None, headers=None, timeout=None):
                calls.append(url)
                return FakeResponse()

        monkeypatch.setenv("CFDETECT_SENTIMENT_KEY", "k")
        provider = HttpSentimentProvider("http://svc", cache_dir=tmp_path,
                                         session=FakeSession())
        p1 = provider.score("some campaign text")
        p2 = provider.score("some campaign text")
        assert p1 == p2
        assert len(calls) == 1  # second hit served from the disk cache

    def test_http_provider_failure_is_typed(self, monkeypatch):
        from cfdetect.text.sentiment import HttpSentimentProvider

        class FailingSession:
            def post(self, *args, **kwargs):
                raise ConnectionError("down")

        monkeypatch.setenv("CFDETECT_SENTIMENT_KEY", "k")
        provider = HttpSentimentProvider("http://svc", session=FailingSession())
        with pytest.raises(ProviderError):
            provider.score("text")


class TestReadability:
    def test_ari_on_hand_counted_sentence(self):
        profile = readability_profile("The cat sat on the mat.")
        assert profile.words == 6
        assert profile.sentences == 1
        assert profile.chars == 17
        assert profile.ari == pytest.approx(4.71 * (17 / 6) + 0.5 * (6 / 1) - 21.43)

    def test_repeated_word_avg_syllables(self):
        text = " ".join(["hello"] * 20) + "."
        profile = readability_profile(text)
        assert profile.avg_syllables_per_word == pytest.approx(count_syllables("hello"))

    def test_self_concatenation_preserves_ari(self):
        text = "Our family needs support for the long recovery. Bills keep arriving every week."
        doubled = text + " " + text
        assert readability_profile(doubled).ari == pytest.approx(
            readability_profile(text).ari)

    def test_counts_feed_pronoun_and_function_features(self):
        profile = readability_profile("I gave my word to them. We will not forget it.")
        assert profile.personal_pronouns >= 4  # I, my, them, we, it
        assert profile.function_words >= profile.personal_pronouns

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            readability_profile("")


class TestFormDescriptors:
    def test_upper_and_exclamation_counts(self):
        counts = form_descriptors("HELLO world!").as_dict()
        assert counts["all_upper"] == 1
        assert counts["exclamation_word"] == 1

    def test_empty_string_is_zero_vector(self):
        assert form_descriptors("").counts.sum() == 0

    def test_manual_scan_of_mixed_tokens(self):
        # Manual application of the counter rules to each of the 4 tokens:
        # don't -> apostrophe + all_lower + shape x'x
        # STOP  -> all_upper + shape X
        # (emoji) -> emoji + catch-all shape
        # now!! -> all_lower + exclamation + repeated punct + shape x!
        counts = form_descriptors("don't STOP \U0001F600 now!!").as_dict()
        assert counts["apostrophe_word"] == 1
        assert counts["emoji"] == 1
        assert counts["all_upper"] == 1
        assert counts["all_lower"] == 2
        assert counts["exclamation_word"] == 1
        assert counts["repeated_punct"] == 1
        assert counts["shape:x'x"] == 1
        assert counts["shape:X"] == 1
        assert counts["shape:x!"] == 1
        assert counts["catch_all_shape"] == 1

    def test_exactly_255_dimensions(self):
        vector = form_descriptors("whatever text")
        assert len(vector.names) == 255
        assert len(set(vector.names)) == 255

    def test_additive_over_concatenation(self):
        # Each copy carries its own sentence terminator so concatenation
        # introduces no new tokens.
        text = "Please HELP now!! Visit www.example.com #urgent @friend 50% $10."
        one = form_descriptors(text).counts
        two = form_descriptors(text + " " + text).counts
        assert (two == 2 * one).all()

    def test_word_shape_rules(self):
        assert word_shape("Hello") == "Xx"
        assert word_shape("don't") == "x'x"
        assert word_shape("ABC123") == "X9"
        assert word_shape("$500") == "$9"

    def test_named_counters_catch_patterns(self):
        text = '"quoted" (aside) wait... soooo well-known 100 x9y'
        counts = form_descriptors(text).as_dict()
        assert counts["quoted"] == 1
        assert counts["parenthesized"] == 1
        assert counts["ellipsis"] == 1
        assert counts["elongated"] == 1
        assert counts["hyphenated"] == 1
        assert counts["all_digit"] == 1
        assert counts["mixed_alnum"] == 1


class TestNer:
    def test_stub_tagger_with_no_spans_gives_zero_vector(self):
        class Silent:
            def spans(self, text):
                return []

        counts = ner_counts("John gave money on Monday", Silent())
        assert counts.counts.sum() == 0

    def test_rule_fallback_on_canonical_sentence(self):
        # Oracle: hand application of the fallback rules. "John" is in the
        # first-name gazetteer, "$500" matches the currency regex, and
        # "Monday" is in the weekday lexicon.
        counts = ner_counts("John gave $500 on Monday", RuleTagger()).as_dict()
        assert counts["PERSON"] >= 1
        assert counts["MONEY"] >= 1
        assert counts["DATE"] >= 1

    def test_counts_double_on_concatenation(self):
        text = "John gave $500 on Monday in Boston for three days"
        tagger = RuleTagger()
        one = ner_counts(text, tagger).counts
        two = ner_counts(text + ". " + text, tagger).counts
        assert (two == 2 * one).all()

    def test_exactly_18_dimensions(self):
        counts = ner_counts("anything", RuleTagger())
        assert len(counts.names) == 18

    def test_span_sum_bounded_by_token_count(self):
        text = "Mary met John at Boston Hospital on Friday June 2019 for $1,000"
        counts = ner_counts(text, RuleTagger())
        assert counts.counts.sum() <= len(word_tokens(text))

    def test_overlap_resolved_longest_first(self):
        class Overlapping:
            def spans(self, text):
                return [EntitySpan(0, 4, "PERSON"), EntitySpan(0, 11, "ORG")]

        counts = ner_counts("Acme Clinic", Overlapping()).as_dict()
        assert counts["ORG"] == 1
        assert counts["PERSON"] == 0
