import random

import pytest

from adtrans.quality import (
    MetricError,
    MetricReport,
    bleu,
    chrf,
    meteor_lite,
    porter_stem,
    render_metric_table,
    score_corpus,
)

from oracles import bleu_oracle, chrf_oracle, meteor_oracle

# Expected values frozen from the independent oracles in tests/oracles.py,
# cross-checked by hand (n-gram tables on paper) before implementation.
BLEU_CASES = [
    (["the cat sat"], ["the cat sat"], 100.0),
    (["the the the"], ["the cat sat"], 34.66806371753174),
    (["the cat sat on the mat"], ["the cat sat on a mat"], 53.7284965911771),
    (["the cat sat", "a dog barks loudly"], ["the cat sat", "the dog barks"],
     51.697315395717055),
    (["", "the cat sat"], ["the cat sat", "the cat sat"], 36.787944117144235),
    (["the small cat"], ["the cat"], 43.67902323681494),
]

CHRF_CASES = [
    (["the cat sat"], ["the cat sat"], 100.0),
    (["abc"], ["xyz"], 0.0),
    (["abcd"], ["abce"], 47.916666666666664),
    (["ab cd"], ["abcd"], 100.0),  # whitespace excluded from n-grams
    (["Die Katze sitzt"], ["Die Katze sass"], 65.92917847137387),
    (["abcd", "wxyz"], ["abce", "wxyz"], 73.95833333333334),
]

METEOR_CASES = [
    (["the cat sat"], ["the cat sat"], 98.14814814814815),
    (["cat"], ["cat"], 50.0),  # penalty formula boundary: one chunk of one match
    (["aaa bbb"], ["ccc ddd"], 0.0),
    (["the cats"], ["the cat"], 93.75),  # stem-stage match
    (["sat cat the"], ["the cat sat"], 50.0),  # fully scrambled: chunks == matches
    (["the cat sat on a mat"], ["the cat sat on the mat"], 80.66666666666666),
]


class TestBleu:
    @pytest.mark.parametrize("hyp,ref,expected", BLEU_CASES)
    def test_hand_computed_cases(self, hyp, ref, expected):
        assert bleu(hyp, ref) == pytest.approx(expected, abs=0.01)

    def test_clipping(self):
        # "the" appears 3 times in hyp but once in ref: clipped unigram 1/3
        score_unclipped_would_be_higher = bleu(["the the the"], ["the cat sat"])
        assert score_unclipped_would_be_higher < bleu(["the cat sat"], ["the cat sat"])

    def test_not_symmetric(self):
        a, b = ["the small cat"], ["the cat"]
        assert bleu(a, b) != bleu(b, a)

    def test_corpus_reorder_invariance(self):
        hyp = ["the cat sat", "a dog barks", "rain falls"]
        ref = ["the cat sat", "the dog barks", "rain fell"]
        assert bleu(hyp, ref) == pytest.approx(
            bleu(list(reversed(hyp)), list(reversed(ref))), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(MetricError):
            bleu(["a"], ["a", "b"])
        with pytest.raises(MetricError):
            bleu([], [])

    def test_random_cross_check_against_oracle(self):
        rng = random.Random(31)
        words = ["der", "die", "das", "hund", "katze", "läuft", "schnell", "haus", "baum"]
        for _ in range(150):
            n = rng.randrange(1, 6)
            hyp = [" ".join(rng.choice(words) for _ in range(rng.randrange(0, 10)))
                   for _ in range(n)]
            ref = [" ".join(rng.choice(words) for _ in range(rng.randrange(1, 10)))
                   for _ in range(n)]
            assert bleu(hyp, ref) == pytest.approx(bleu_oracle(hyp, ref), abs=1e-9)


class TestChrf:
    @pytest.mark.parametrize("hyp,ref,expected", CHRF_CASES)
    def test_hand_computed_cases(self, hyp, ref, expected):
        assert chrf(hyp, ref) == pytest.approx(expected, abs=0.01)

    def test_not_symmetric(self):
        a, b = ["abcdef"], ["abcd"]
        assert chrf(a, b) != chrf(b, a)

    def test_random_cross_check_against_oracle(self):
        rng = random.Random(37)
        alphabet = "abcdefgh "
        for _ in range(150):
            n = rng.randrange(1, 5)
            hyp = ["".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 15)))
                   for _ in range(n)]
            ref = ["".join(rng.choice(alphabet) for _ in range(rng.randrange(1, 15)))
                   for _ in range(n)]
            assert chrf(hyp, ref) == pytest.approx(chrf_oracle(hyp, ref), abs=1e-9)


class TestMeteorLite:
    @pytest.mark.parametrize("hyp,ref,expected", METEOR_CASES)
    def test_hand_computed_cases(self, hyp, ref, expected):
        assert meteor_lite(hyp, ref) == pytest.approx(expected, abs=0.01)

    def test_identity_is_analytic_maximum_not_100(self):
        # 3-token identity keeps the fragmentation penalty: 1 - 0.5*(1/3)^3
        assert meteor_lite(["the cat sat"], ["the cat sat"]) < 100.0

    def test_not_symmetric(self):
        a, b = ["the cat sat down"], ["the cat sat"]
        assert meteor_lite(a, b) != meteor_lite(b, a)

    def test_random_cross_check_against_oracle(self):
        rng = random.Random(41)
        words = ["cats", "cat", "running", "run", "the", "house", "houses", "dog"]
        for _ in range(150):
            n = rng.randrange(1, 5)
            hyp = [" ".join(rng.choice(words) for _ in range(rng.randrange(0, 8)))
                   for _ in range(n)]
            ref = [" ".join(rng.choice(words) for _ in range(rng.randrange(1, 8)))
                   for _ in range(n)]
            assert meteor_lite(hyp, ref) == pytest.approx(meteor_oracle(hyp, ref), abs=1e-9)


class TestReport:
    def test_identity_corpus_scores(self):
        corpus = ["Ein Mann tritt ein.", "Die Katze sitzt."]
        report = score_corpus(corpus, list(corpus))
        assert report.bleu == pytest.approx(100.0)
        assert report.chrf == pytest.approx(100.0)
        assert report.meteor < 100.0  # analytic maximum below 100

    def test_report_bounds_validated(self):
        with pytest.raises(MetricError):
            MetricReport(bleu=101.0, meteor=50.0, chrf=50.0, n_segments=1)

    def test_table_layout(self):
        report = score_corpus(["the cat"], ["the cat"])
        table = render_metric_table({"gpt-4o text-only en-de": report})
        assert "BLEU" in table and "chrF" in table
        assert "gpt-4o text-only en-de" in table


class TestPorterStem:
    # Hand-traced through the published algorithm, step by step.
    PAIRS = [
        ("caresses", "caress"), ("ponies", "poni"), ("ties", "ti"),
        ("caress", "caress"), ("cats", "cat"), ("feed", "feed"),
        ("motoring", "motor"), ("hopping", "hop"), ("falling", "fall"),
        ("filing", "file"), ("happy", "happi"), ("sky", "sky"),
        ("relational", "relat"), ("conditional", "condit"), ("rational", "ration"),
        ("digitizer", "digit"), ("operator", "oper"), ("effective", "effect"),
        ("hopefulness", "hope"), ("goodness", "good"), ("controlling", "control"),
        ("roll", "roll"), ("sensitivity", "sensit"), ("generalization", "gener"),
    ]

    @pytest.mark.parametrize("word,stem", PAIRS)
    def test_known_pairs(self, word, stem):
        assert porter_stem(word) == stem

    def test_short_and_nonalpha_unchanged(self):
        assert porter_stem("at") == "at"
        assert porter_stem("123") == "123"
        assert porter_stem("läuft") == "läuft"

    def test_idempotent_on_common_words(self):
        for word, _ in self.PAIRS:
            once = porter_stem(word)
            assert porter_stem(once) in (once, porter_stem(once))  # stable value
