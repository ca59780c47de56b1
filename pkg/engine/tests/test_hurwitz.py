"""
Hurwitz tuple, word and move tests.
"""

import random

import pytest
from hypothesis import given, settings, strategies as st

from app.services import hurwitz
from app.services.errors import TupleError
from app.services.hurwitz import (
    HurwitzTuple,
    MoveSpec,
    TwistWord,
    apply_script,
    fiber_sum,
    global_conjugate,
    hurwitz_move,
    invert_word,
    parse_move_script,
    parse_word,
    reduce_word,
    tuple_from_document,
    tuple_from_word,
    type_count,
)
from app.services.representations import symplectic_rep
from app.services.rings import ZZ

TORUS_WORD = "c1 c2 | ^6"


def torus_tuple() -> HurwitzTuple:
    return tuple_from_word(parse_word(TORUS_WORD), genus=1, label="torus")


class TestWords:
    """Tests for the compact word syntax."""

    def test_repetition(self):
        """Should repeat the body of a word after '| ^n'."""
        word = parse_word(TORUS_WORD)
        assert len(word) == 12
        assert word[:2] == (("c1", 1), ("c2", 1))

    def test_exponents(self):
        """Should expand powers and negative exponents."""
        assert parse_word("c5^2 c3^-1") == (("c5", 1), ("c5", 1), ("c3", -1))
        assert parse_word("c4^{3}") == (("c4", 1),) * 3

    def test_identity(self):
        """Should read 'id' and the empty string as the empty word."""
        assert parse_word("id") == ()
        assert parse_word("") == ()

    @pytest.mark.parametrize("text", ["c1 | 6", "c1 |^x", "3c"])
    def test_malformed(self, text):
        """Should raise PARSE on malformed words."""
        with pytest.raises(TupleError) as e:
            parse_word(text)
        assert e.value.error_type == "PARSE"

    def test_free_cancellation(self):
        """Should cancel adjacent inverse pairs, including nested ones."""
        word = (("c1", 1), ("c2", 1), ("c2", -1), ("c1", -1), ("c3", 1))
        assert reduce_word(word) == (("c3", 1),)
        assert reduce_word(word[:4] + invert_word(word[:4])) == ()

    def test_twist_word(self):
        """Should expand base^conjugator as conjugator^-1 base conjugator."""
        entry = TwistWord("c1", (("c2", 1),))
        assert entry.as_word() == (("c2", -1), ("c1", 1), ("c2", 1))
        assert str(entry) == "c1^[c2]"
        assert entry.conjugated((("c2", -1),)) == TwistWord("c1")


class TestTuples:
    """Tests for building tuples."""

    def test_from_word(self):
        """Should create one unconjugated entry per letter."""
        t = torus_tuple()
        assert t.m == 12
        assert t.letters() == ["c1", "c2"]
        assert t.max_conjugator_length() == 0

    def test_negative_letter(self):
        """Should reject inverse letters in a tuple word."""
        with pytest.raises(TupleError) as e:
            tuple_from_word(parse_word("c1 c2^-1"))
        assert e.value.error_type == "NEGATIVE_LETTER"

    def test_empty(self):
        """Should reject empty tuples."""
        with pytest.raises(TupleError) as e:
            tuple_from_word(())
        assert e.value.error_type == "EMPTY"

    def test_document(self):
        """Should read conjugators from a tuple document."""
        t = tuple_from_document({
            "genus": 2,
            "entries": [{"base": "c1", "conj": ["c2", "c3^-1"]}, {"base": "c4"}],
        })
        assert t.entries[0] == TwistWord("c1", (("c2", 1), ("c3", -1)))
        assert t.genus_hint == 2
        assert tuple_from_document(t.to_json()) == t

    @pytest.mark.parametrize("document", [
        {"entries": []},
        {"entries": [{"base": "1c"}]},
        {"alphabet": "other", "entries": [{"base": "c1"}]},
    ])
    def test_document_schema(self, document):
        """Should raise SCHEMA for invalid documents."""
        with pytest.raises(TupleError) as e:
            tuple_from_document(document)
        assert e.value.error_type == "SCHEMA"

    def test_save_and_load(self, tmp_path):
        """Should write and read tuple files."""
        path = tmp_path / "t.json"
        t = hurwitz_move(torus_tuple(), 3, "forward")
        hurwitz.save_tuple(t, path)
        assert hurwitz.load_tuple(path).entries == t.entries

    def test_unreadable_file(self, tmp_path):
        """Should raise SCHEMA for files that are not JSON."""
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(TupleError) as e:
            hurwitz.load_tuple(path)
        assert e.value.error_type == "SCHEMA"


class TestMoves:
    """Tests for Hurwitz moves and global conjugation."""

    def test_forward(self):
        """Should swap entries and conjugate the moved one."""
        t = tuple_from_word(parse_word("c1 c2 c3"))
        moved = hurwitz_move(t, 1, "forward")
        assert moved.entries[0] == TwistWord("c2")
        assert moved.entries[1] == TwistWord("c1", (("c2", 1),))
        assert moved.entries[2] == TwistWord("c3")

    def test_backward(self):
        """Should move the right entry left, conjugated by the inverse of the left one."""
        t = tuple_from_word(parse_word("c1 c2"))
        moved = hurwitz_move(t, 1, "backward")
        assert moved.entries[0] == TwistWord("c2", (("c1", -1),))
        assert moved.entries[1] == TwistWord("c1")

    @pytest.mark.parametrize("index", [0, 12])
    def test_index_range(self, index):
        """Should reject indices outside 1..m-1."""
        with pytest.raises(TupleError) as e:
            hurwitz_move(torus_tuple(), index, "forward")
        assert e.value.error_type == "INDEX"

    @given(st.lists(st.integers(1, 11), min_size=1, max_size=8))
    @settings(max_examples=30, deadline=None)
    def test_backward_undoes_forward(self, indices):
        """Should restore the tuple when moves are undone in reverse order."""
        t = torus_tuple()
        moved = t
        for i in indices:
            moved = hurwitz_move(moved, i, "forward")
        for i in reversed(indices):
            moved = hurwitz_move(moved, i, "backward")
        assert moved.entries == t.entries

    def test_global_conjugate(self):
        """Should conjugate every entry, leaving the tuple alone for the empty word."""
        t = tuple_from_word(parse_word("c1 c2"))
        assert global_conjugate(t, ()) is t
        conjugated = global_conjugate(t, (("c1", 1),))
        assert all(entry.conjugator == (("c1", 1),) for entry in conjugated.entries)

    def test_moves_preserve_product(self):
        """Should keep the evaluated product the identity along a random walk."""
        rep = symplectic_rep(1, ZZ)
        t = hurwitz.random_walk(torus_tuple(), 60, seed=3, conjugation_probability=0.2)
        assert rep.product(t).is_identity()

    def test_random_walk_is_deterministic(self):
        """Should produce the same tuple for the same seed."""
        a = hurwitz.random_walk(torus_tuple(), 25, seed=11)
        b = hurwitz.random_walk(torus_tuple(), 25, seed=11)
        assert a.entries == b.entries

    def test_random_moves_yield_moves(self):
        """Should yield each move with the tuple it produced."""
        rng = random.Random(0)
        steps = list(hurwitz.random_moves(torus_tuple(), 5, rng))
        assert len(steps) == 5
        assert all(isinstance(move, MoveSpec) for move, _ in steps)

    def test_negative_steps(self):
        """Should refuse a negative number of steps."""
        with pytest.raises(TupleError):
            list(hurwitz.random_moves(torus_tuple(), -1, random.Random(0)))


class TestFiberSum:
    """Tests for fiber sums."""

    def test_concatenates(self):
        """Should append the second tuple conjugated by the gluing word."""
        t = torus_tuple()
        glued = fiber_sum(t, t, (("c1", 1),))
        assert glued.m == 24
        assert glued.entries[12] == TwistWord("c1", (("c1", 1),))
        assert glued.label == "torus #c1 torus"

    def test_genus_mismatch(self):
        """Should refuse to glue tuples of different genus."""
        other = tuple_from_word(parse_word("c1 c2"), genus=2)
        with pytest.raises(TupleError) as e:
            fiber_sum(torus_tuple(), other)
        assert e.value.error_type == "ALPHABET"


class TestScripts:
    """Tests for move scripts."""

    def test_parse(self):
        """Should parse moves and skip comments and blank lines."""
        moves = parse_move_script("# header\nforward 2\n\nbackward 1  # undo\nconjugate c1 c2^-1\n")
        assert [str(move) for move in moves] == ["forward 2", "backward 1", "conjugate c1 c2^-1"]

    @pytest.mark.parametrize("script", ["forward", "sideways 2", "backward x"])
    def test_malformed(self, script):
        """Should raise PARSE on unknown moves and missing indices."""
        with pytest.raises(TupleError) as e:
            parse_move_script(script)
        assert e.value.error_type == "PARSE"

    def test_apply(self):
        """Should apply moves in order."""
        t = tuple_from_word(parse_word("c1 c2 c3"))
        result = apply_script(t, parse_move_script("forward 1\nbackward 1"))
        assert result.entries == t.entries


class TestTypeCount:
    """Tests for counting separating entries."""

    def test_from_flags(self):
        """Should count separating entries from a flag mapping."""
        t = tuple_from_word(parse_word("c1 d c1"))
        assert type_count(t, {"c1": False, "d": True}) == (2, 1)

    def test_missing_flag(self):
        """Should raise MISSING_FLAG for letters without a flag."""
        with pytest.raises(TupleError) as e:
            type_count(torus_tuple(), {"c1": False})
        assert e.value.error_type == "MISSING_FLAG"
