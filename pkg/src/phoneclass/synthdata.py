"""Deterministic synthetic speech corpus for tests and smoke runs.

No real recordings ship with the package. Instead each phone class gets a
fixed two-sine signature, each speaker a small frequency/amplitude profile,
and each speaker a severity score in [0, 10] rated like the clinical scale:
0 means strongly altered speech, 10 means perfect. Low scores mix phones
toward a confusable neighbor and add noise, so classification accuracy rises
with the score by construction, which is what the perceptual correlation
stage needs to have something real to find.

Everything derives from np.random.default_rng seeded with explicit integer
lists, so two calls with the same arguments produce byte-identical corpora.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from phoneclass.corpus.inventory import PhoneInventory, load_inventory
from phoneclass.perceptual.ratings import ExpertRating, write_ratings_csv

SAMPLE_RATE_HZ = 16000
SEGMENT_DURATION_RANGE_S = (0.18, 0.34)
SILENCE_EVERY = 5


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    gender: str
    severity: float
    intelligibility: float
    freq_scale: float
    amplitude: float


def phone_signature(class_index: int) -> tuple[float, float]:
    """Two sine frequencies, unique per class and well under Nyquist at 16 kHz."""
    return 200.0 + 70.0 * class_index, 450.0 + 110.0 * class_index


def speaker_profiles(n_speakers: int, seed: int) -> list[SpeakerProfile]:
    profiles = []
    for k in range(n_speakers):
        rng = np.random.default_rng([seed, 101, k])
        severity = float(np.round(rng.uniform(0.0, 10.0), 2))
        intelligibility = float(np.clip(np.round(severity + rng.normal(0.0, 0.4), 2), 0.0, 10.0))
        profiles.append(
            SpeakerProfile(
                speaker_id=f"spk{k:03d}",
                gender="F" if k % 2 == 0 else "M",
                severity=severity,
                intelligibility=intelligibility,
                freq_scale=float(1.0 + rng.uniform(-0.015, 0.015)),
                amplitude=float(rng.uniform(0.5, 0.8)),
            )
        )
    return profiles


def _segment_wave(
    class_index: int,
    n_samples: int,
    profile: SpeakerProfile,
    inventory: PhoneInventory,
    rng: np.random.Generator,
    sample_rate_hz: int,
) -> np.ndarray:
    t = np.arange(n_samples, dtype=np.float64) / sample_rate_hz
    alteration = (10.0 - profile.severity) / 10.0
    noise_scale = 0.02 + 0.06 * alteration
    if class_index == inventory.silence_label:
        return rng.normal(0.0, 0.01, n_samples)

    def tone(idx: int) -> np.ndarray:
        f1, f2 = phone_signature(idx)
        f1 *= profile.freq_scale
        f2 *= profile.freq_scale
        phase = rng.uniform(0.0, 2.0 * np.pi)
        return profile.amplitude * (0.7 * np.sin(2 * np.pi * f1 * t + phase) + 0.3 * np.sin(2 * np.pi * f2 * t))

    # Alteration drags the phone toward its neighbor in the inventory, the
    # synthetic stand-in for imprecise articulation.
    blend = 0.45 * alteration
    neighbor = (class_index + 1) % (inventory.n_classes - 1)
    wave = (1.0 - blend) * tone(class_index) + blend * tone(neighbor)
    return wave + rng.normal(0.0, noise_scale, n_samples)


def phone_cycle(n_phones: int, seed: int):
    """Endless phone indices, a fresh permutation per pass.

    Cycling instead of iid sampling guarantees every class shows up once the
    corpus has at least n_phones non-silence segments, which the balancing
    stage requires.
    """
    rng = np.random.default_rng([seed, 404])
    while True:
        yield from rng.permutation(n_phones).tolist()


def synth_utterance(
    profile: SpeakerProfile,
    inventory: PhoneInventory,
    rng: np.random.Generator,
    n_segments: int,
    sample_rate_hz: int = SAMPLE_RATE_HZ,
    phones=None,
) -> tuple[np.ndarray, list[tuple[float, float, str]]]:
    """Waveform plus (start_s, end_s, symbol) alignment rows."""
    pieces = []
    rows = []
    cursor = 0
    for s in range(n_segments):
        if s % SILENCE_EVERY == SILENCE_EVERY - 1:
            class_index = inventory.silence_label
        elif phones is not None:
            class_index = int(next(phones))
        else:
            class_index = int(rng.integers(0, inventory.n_classes - 1))
        duration = rng.uniform(*SEGMENT_DURATION_RANGE_S)
        n_samples = int(round(duration * sample_rate_hz))
        pieces.append(_segment_wave(class_index, n_samples, profile, inventory, rng, sample_rate_hz))
        start_s = cursor / sample_rate_hz
        end_s = (cursor + n_samples) / sample_rate_hz
        rows.append((start_s, end_s, inventory.class_symbols[class_index]))
        cursor += n_samples
    return np.concatenate(pieces), rows


def _write_wav(path: Path, samples: np.ndarray, sample_rate_hz: int) -> None:
    scaled = np.clip(samples, -1.0, 1.0)
    wavfile.write(path, sample_rate_hz, (scaled * 32767.0).astype(np.int16))


def make_corpus(
    out_dir: str | Path,
    n_speakers: int = 8,
    utterances_per_speaker: int = 2,
    segments_per_utterance: int = 10,
    seed: int = 0,
    inventory: PhoneInventory | None = None,
    corpus_tag: str = "synthetic",
    n_unrated_speakers: int = 0,
    sample_rate_hz: int = SAMPLE_RATE_HZ,
) -> Path:
    """Write WAVs, alignments, manifest.csv and ratings.csv; return the manifest path.

    The last n_unrated_speakers get no rows in ratings.csv, mirroring test
    speakers who were never seen by the rating panel.
    """
    inventory = inventory if inventory is not None else load_inventory()
    out_dir = Path(out_dir)
    (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    (out_dir / "alignments").mkdir(parents=True, exist_ok=True)
    profiles = speaker_profiles(n_speakers, seed)

    manifest_rows = []
    phones = phone_cycle(inventory.n_classes - 1, seed)
    for k, profile in enumerate(profiles):
        for u in range(utterances_per_speaker):
            rng = np.random.default_rng([seed, 202, k, u])
            samples, rows = synth_utterance(
                profile, inventory, rng, segments_per_utterance, sample_rate_hz, phones=phones
            )
            utt_id = f"{profile.speaker_id}_u{u:02d}"
            _write_wav(out_dir / "audio" / f"{utt_id}.wav", samples, sample_rate_hz)
            with (out_dir / "alignments" / f"{utt_id}.csv").open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                for start_s, end_s, symbol in rows:
                    writer.writerow([f"{start_s:.6f}", f"{end_s:.6f}", symbol])
            manifest_rows.append(
                [utt_id, f"audio/{utt_id}.wav", profile.speaker_id, profile.gender, corpus_tag, f"alignments/{utt_id}.csv"]
            )

    manifest_path = out_dir / "manifest.csv"
    with manifest_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["utterance_id", "audio_path", "speaker_id", "gender", "corpus_tag", "alignment_path"])
        writer.writerows(manifest_rows)

    write_ratings_csv(out_dir / "ratings.csv", make_ratings(profiles, seed, n_unrated=n_unrated_speakers))
    return manifest_path


def make_ratings(
    profiles: list[SpeakerProfile],
    seed: int,
    n_raters: int = 6,
    n_unrated: int = 0,
    jitter: float = 0.5,
) -> list[ExpertRating]:
    """Panel ratings jittered around each profile's true severity/intelligibility."""
    rated = profiles[: len(profiles) - n_unrated] if n_unrated else profiles
    ratings = []
    for k, profile in enumerate(rated):
        rng = np.random.default_rng([seed, 303, k])
        for r in range(n_raters):
            ratings.append(
                ExpertRating(
                    speaker_id=profile.speaker_id,
                    rater_id=f"rater{r:02d}",
                    severity=float(np.clip(profile.severity + rng.normal(0.0, jitter), 0.0, 10.0)),
                    intelligibility=float(np.clip(profile.intelligibility + rng.normal(0.0, jitter), 0.0, 10.0)),
                )
            )
    return ratings
