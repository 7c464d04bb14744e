import unicodedata
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpe_learn import LearnConfig, learn_bpe_indexed
from core_model import MergeRule, MergeTable, PreconditionError, WordFrequencyTable
from translit import (
    CYR2LAT,
    LAT2CYR,
    cyrillic_to_latin,
    latin_to_cyrillic,
    latin_to_cyrillic_report,
    load_table,
    parse_table,
    transliterate,
    transliterate_merge_table,
    transliterate_rule,
)

RUSSIAN_LOWER = "абвгдеёжзийклмнопрстуфхцчшщъыьэюя"
RUSSIAN_UPPER = "АБВГДЕЁЖЗИЙКЛМНОПРСТУФХЦЧШЩЪЫЬЭЮЯ"


def test_example_word():
    assert cyrillic_to_latin("Клаустрофобия") == "Klaustrofobiâ"
    assert latin_to_cyrillic("Klaustrofobiâ") == "Клаустрофобия"


def test_full_russian_alphabet_round_trip():
    for text in (RUSSIAN_LOWER, RUSSIAN_UPPER):
        assert latin_to_cyrillic(cyrillic_to_latin(text)) == text


def test_letters_outside_the_table_pass_through():
    assert cyrillic_to_latin("Moscow 2024!") == "Moscow 2024!"
    assert cyrillic_to_latin("Ъ") == "Ъ"


def test_combining_images_match_longest_first():
    assert cyrillic_to_latin("ґ") == "g\u0300"
    assert latin_to_cyrillic("g\u0300g") == "ґг"


_STRESS = "\u0301\u0300"


def _without_grave_collisions(text):
    """г/ф/Г/Ф + grave spell the images of ґ/ѳ/Ґ/Ѳ; use the acute there"""
    for letter in "гфГФ":
        text = text.replace(letter + "\u0300", letter + "\u0301")
    return text


@pytest.mark.parametrize("word", ["моло\u0301ко", "е\u0301сли", "за\u0300мок", "э\u0301то", "я\u0301блоко"])
def test_stressed_words_round_trip(word):
    latin = cyrillic_to_latin(word)
    assert latin_to_cyrillic(latin) == word
    assert latin_to_cyrillic(unicodedata.normalize("NFC", latin)) == word


def test_stress_mark_stays_separate():
    assert cyrillic_to_latin("моло\u0301ко") == "molo\u0301ko"
    assert latin_to_cyrillic("mol\u00f3ko") == "моло\u0301ко"


def test_all_caps_hard_and_soft_signs_pass_through():
    assert cyrillic_to_latin("ОБЪЕКТ") == "OBЪEKT"
    assert latin_to_cyrillic("OBЪEKT") == "ОБЪЕКТ"
    assert cyrillic_to_latin("объект") == "ob\u02baekt"


@given(st.text(alphabet=RUSSIAN_LOWER + RUSSIAN_UPPER + "ґѓєѕіїјљњќўџ -.,0123456789" + _STRESS, max_size=40)
       .map(_without_grave_collisions))
@settings(max_examples=300)
def test_random_cyrillic_round_trip(text):
    assert latin_to_cyrillic(cyrillic_to_latin(text)) == unicodedata.normalize("NFC", text)


def test_cyrillic_in_latin_input_is_flagged():
    result = latin_to_cyrillic_report("abжз c")
    assert result.text == "абжз ц"
    assert result.untranslatable == [(2, 4)]


def test_unknown_direction():
    with pytest.raises(PreconditionError):
        transliterate("abc", "latin")


class TestRules:
    def test_rule_maps_both_sides(self):
        rule = MergeRule("k", "a</w>", 0)
        assert transliterate_rule(rule, LAT2CYR, "</w>") == ("к", "а</w>")

    def test_rule_with_cyrillic_in_latin_side_is_dropped(self):
        assert transliterate_rule(MergeRule("ж", "a", 0), LAT2CYR, "</w>") is None

    def test_rule_splitting_a_combining_image_is_dropped(self):
        assert transliterate_rule(MergeRule("g", "\u0300", 0), LAT2CYR, "</w>") is None

    def test_table_renumbers_kept_rules(self):
        merges = MergeTable.from_pairs([("ж", "a"), ("n", "a"), ("na", "</w>")])
        mapped, report = transliterate_merge_table(merges, LAT2CYR)
        assert mapped.pairs == [("н", "а"), ("на", "</w>")]
        assert [r.rank for r in mapped] == [0, 1]
        assert [r.pair for r in report.dropped] == [("ж", "a")]

    def test_cyrillic_table_to_latin(self):
        merges = MergeTable.from_pairs([("я", "</w>"), ("н", "я</w>")])
        mapped, report = transliterate_merge_table(merges, CYR2LAT)
        assert mapped.pairs == [("â", "</w>"), ("n", "â</w>")]
        assert report.dropped == []

    @given(st.lists(st.text(alphabet=RUSSIAN_LOWER + "\u0301", min_size=1, max_size=8), min_size=1, max_size=12))
    @settings(max_examples=200)
    def test_learned_table_survives_latin_cyrillic_latin(self, words):
        latin = WordFrequencyTable(Counter(cyrillic_to_latin(w) for w in words))
        merges = learn_bpe_indexed(latin, LearnConfig(num_merges=30, min_frequency=1))
        cyrillic, report = transliterate_merge_table(merges, LAT2CYR)
        back, back_report = transliterate_merge_table(cyrillic, CYR2LAT)
        assert report.dropped == []
        assert back_report.dropped == []
        assert back.pairs == merges.pairs


class TestTableFile:
    def test_custom_table(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("# custom\nа\tq\nб\tb\n", encoding="utf-8")
        table = load_table(path)
        assert cyrillic_to_latin("баба", table) == "bqbq"
        assert latin_to_cyrillic("bqbq", table) == "баба"

    def test_images_must_be_unique(self):
        with pytest.raises(PreconditionError):
            parse_table(["а\ta", "б\ta"])

    def test_malformed_line(self):
        with pytest.raises(PreconditionError, match="line 1"):
            parse_table(["а a"])
