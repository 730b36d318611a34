import math
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phoneclass.corpus.alignments import AlignmentSegment, UtteranceRecord
from phoneclass.corpus.frames import (
    FRAME_LENGTH_S,
    BalancingPolicy,
    CorpusManifest,
    FrameRecord,
    balance,
    class_histogram,
    extract_frames,
    read_frames_csv,
    split_train_validation,
    write_frames_csv,
)
from phoneclass.errors import BalancingError, SplitError


def utterance(segments, uid="u1", speaker="s1", gender="F"):
    return UtteranceRecord(
        utterance_id=uid,
        audio_path=Path("/dev/null"),
        speaker_id=speaker,
        gender=gender,
        corpus_tag="t",
        segments=tuple(AlignmentSegment(*s) for s in segments),
    )


def frame(label, uid="u", center=0.0, speaker="s", gender="F"):
    return FrameRecord(utterance_id=uid, center_s=center, label=label, speaker_id=speaker, gender=gender)


class TestExtractFrames:
    def test_grid_anchored_at_first_segment(self, inventory):
        utt = utterance([(0.5, 0.53, "a")])
        frames = extract_frames(utt, inventory)
        assert [f.center_s for f in frames] == [0.5, 0.51, 0.52]

    def test_boundary_center_belongs_to_later_segment(self, inventory):
        utt = utterance([(0.0, 0.1, "a"), (0.1, 0.2, "i")])
        frames = extract_frames(utt, inventory)
        at_boundary = [f for f in frames if math.isclose(f.center_s, 0.1)]
        assert len(at_boundary) == 1
        assert at_boundary[0].label == inventory.index_of("i")

    def test_gap_produces_no_frames(self, inventory):
        utt = utterance([(0.0, 0.05, "a"), (0.2, 0.25, "i")])
        frames = extract_frames(utt, inventory)
        assert all(f.center_s < 0.05 or f.center_s >= 0.2 for f in frames)

    def test_labels_follow_segments(self, inventory):
        utt = utterance([(0.0, 0.1, "a"), (0.1, 0.2, "sil")])
        frames = extract_frames(utt, inventory)
        labels = {f.center_s: f.label for f in frames}
        assert labels[0.0] == inventory.index_of("a")
        assert labels[0.19] == inventory.silence_label

    def test_empty_utterance(self, inventory):
        assert extract_frames(utterance([]), inventory) == []

    @given(
        start=st.floats(0.0, 5.0),
        duration=st.floats(0.011, 2.0),
        hop_ms=st.integers(1, 50),
    )
    @settings(max_examples=60, deadline=None)
    def test_frame_count_matches_closed_form(self, inventory, start, duration, hop_ms):
        """Count of grid points in [start, end) given the anchor at start."""
        utt = utterance([(start, start + duration, "a")])
        frames = extract_frames(utt, inventory, hop_s=hop_ms / 1000)
        start_us = round(start * 1e6)
        end_us = round((start + duration) * 1e6)
        hop_us = hop_ms * 1000
        expected = max(0, (end_us - start_us - 1) // hop_us + 1)
        assert len(frames) == expected

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_grid_is_bit_stable_across_recomputation(self, inventory, seed):
        rng = np.random.default_rng(seed)
        bounds = np.sort(rng.uniform(0, 4, size=6))
        segs = [(bounds[i], bounds[i + 1], "a") for i in range(0, 6, 2) if bounds[i] < bounds[i + 1]]
        if not segs:
            return
        utt = utterance(segs)
        first = [(f.center_s, f.label) for f in extract_frames(utt, inventory)]
        second = [(f.center_s, f.label) for f in extract_frames(utt, inventory)]
        assert first == second


class TestBalance:
    def _full_frames(self, inventory, rng, base=20, spread=30):
        frames = []
        for c in range(inventory.n_classes):
            n = base + int(rng.integers(0, spread))
            for k in range(n):
                frames.append(frame(c, uid=f"u{k % 5}", center=c + k * 0.01,
                                    speaker=f"s{k % 3}", gender="F" if k % 2 else "M"))
        return frames

    def test_all_classes_cut_to_min(self, inventory):
        rng = np.random.default_rng(0)
        frames = self._full_frames(inventory, rng)
        out = balance(frames, BalancingPolicy(seed=1), inventory)
        counts = Counter(f.label for f in out)
        assert len(counts) == inventory.n_classes
        original = Counter(f.label for f in frames)
        assert set(counts.values()) == {min(original.values())}

    def test_target_count_caps(self, inventory):
        rng = np.random.default_rng(0)
        frames = self._full_frames(inventory, rng)
        out = balance(frames, BalancingPolicy(seed=1, target_count=5), inventory)
        assert set(Counter(f.label for f in out).values()) == {5}

    def test_missing_class_names_symbol(self, inventory):
        frames = [frame(c) for c in range(inventory.n_classes) if c != inventory.index_of("u")]
        with pytest.raises(BalancingError, match="'u'"):
            balance(frames, BalancingPolicy(), inventory)

    def test_silence_exclusion_allows_missing_silence(self, inventory):
        frames = [frame(c, center=float(k)) for c in range(inventory.n_classes - 1) for k in range(3)]
        out = balance(frames, BalancingPolicy(exclude_silence_from_minimum=True), inventory)
        assert inventory.silence_label not in {f.label for f in out}

    def test_deterministic_under_seed(self, inventory):
        rng = np.random.default_rng(3)
        frames = self._full_frames(inventory, rng)
        a = balance(frames, BalancingPolicy(seed=42), inventory)
        b = balance(frames, BalancingPolicy(seed=42), inventory)
        assert a == b

    def test_no_balancing_passes_everything_through(self, inventory):
        frames = [frame(0), frame(0, center=1.0), frame(5, center=2.0)]
        out = balance(frames, BalancingPolicy(balance_phones=False), inventory)
        assert len(out) == 3

    def test_gender_balancing_equal_halves(self, inventory):
        frames = []
        for c in range(inventory.n_classes):
            for k in range(6):
                frames.append(frame(c, center=c + k * 0.01, gender="F"))
            for k in range(4):
                frames.append(frame(c, center=c + 1 + k * 0.01, gender="M"))
            frames.append(frame(c, center=c + 2, gender="unknown"))
        out = balance(frames, BalancingPolicy(balance_gender=True, seed=0), inventory)
        by = Counter((f.label, f.gender) for f in out)
        assert set(by.values()) == {4}
        assert all(g in ("F", "M") for _, g in by)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_balanced_output_is_subset_with_equal_counts(self, inventory, seed):
        rng = np.random.default_rng(seed)
        frames = self._full_frames(inventory, rng, base=3, spread=8)
        out = balance(frames, BalancingPolicy(seed=seed), inventory)
        counts = Counter(f.label for f in out)
        assert len(set(counts.values())) == 1
        pool = Counter(frames)
        taken = Counter(out)
        assert all(taken[f] <= pool[f] for f in taken)


class TestSplit:
    def test_ratio_and_balance(self, inventory):
        frames = [frame(c, center=float(k)) for c in range(4) for k in range(10)]
        train, val = split_train_validation(frames, 0.9, seed=0)
        assert Counter(f.label for f in train) == {c: 9 for c in range(4)}
        assert Counter(f.label for f in val) == {c: 1 for c in range(4)}

    def test_both_sides_nonempty_even_for_tiny_classes(self):
        frames = [frame(0, center=0.0), frame(0, center=0.1)]
        train, val = split_train_validation(frames, 0.99, seed=0)
        assert len(train) == 1 and len(val) == 1

    def test_single_frame_class_rejected(self):
        with pytest.raises(SplitError):
            split_train_validation([frame(0)], 0.9, seed=0)

    def test_bad_ratio_rejected(self):
        with pytest.raises(SplitError):
            split_train_validation([frame(0), frame(0, center=0.1)], 1.0, seed=0)

    @given(st.integers(0, 10_000), st.floats(0.05, 0.95))
    @settings(max_examples=30, deadline=None)
    def test_split_partitions_input(self, seed, ratio):
        rng = np.random.default_rng(seed)
        frames = [frame(c, center=float(k) + c) for c in range(5) for k in range(2 + int(rng.integers(0, 20)))]
        train, val = split_train_validation(frames, ratio, seed=seed)
        assert sorted(train + val, key=lambda f: (f.label, f.center_s)) == sorted(
            frames, key=lambda f: (f.label, f.center_s)
        )
        train_counts = Counter(f.label for f in train)
        val_counts = Counter(f.label for f in val)
        assert all(train_counts[c] >= 1 and val_counts[c] >= 1 for c in range(5))


class TestFrameIO:
    def test_csv_round_trip(self, tmp_path, inventory):
        frames = [frame(c, uid=f"u{c}", center=0.01 * c, speaker=f"s{c % 2}") for c in range(10)]
        path = tmp_path / "frames.csv"
        write_frames_csv(path, frames)
        assert read_frames_csv(path) == frames

    def test_histogram_uses_symbols(self, inventory):
        frames = [frame(inventory.index_of("a")), frame(inventory.silence_label)]
        hist = class_histogram(frames, inventory)
        assert hist == {"a": 1, "sil": 1}


class TestCorpusManifest:
    def test_duration_is_frames_times_window(self):
        m = CorpusManifest(corpus_tag="t", usage="train", frame_count=3_118_000)
        assert m.frame_length_s == FRAME_LENGTH_S
        assert m.duration_hours == pytest.approx(110.0, abs=0.1)

    def test_write_is_deterministic(self, tmp_path):
        m = CorpusManifest(corpus_tag="t", usage="train", frame_count=5, per_class_counts={"a": 5})
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        m.write(p1)
        m.write(p2)
        assert p1.read_bytes() == p2.read_bytes()
