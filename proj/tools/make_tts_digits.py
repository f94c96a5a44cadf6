#!/usr/bin/env python3
"""Generate a small synthetic spoken-digit corpus in FSDD layout.

Each "speaker" is an eSpeak-NG voice variant; each take perturbs speaking
rate, pitch, gain, leading silence and adds low-level noise. Files are
written as 8 kHz mono PCM16 named ``{digit}_{speaker}_{take}.wav``.

Requires the ``espeakng-loader`` wheel (bundles libespeak-ng and its data),
plus numpy and scipy.

    python3 tools/make_tts_digits.py --out tests/data/tts_digits
"""

import argparse
import ctypes
import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

import espeakng_loader

WORDS = ["zero", "one", "two", "three", "four",
         "five", "six", "seven", "eight", "nine"]

# speaker id -> (voice name, base pitch, base rate)
SPEAKERS = {
    "adam": ("en+m1", 45, 150),
    "bella": ("en+f2", 70, 160),
    "carl": ("en-us+m3", 35, 140),
    "dora": ("en-us+f4", 80, 170),
    "emil": ("en-gb-x-rp+m7", 55, 155),
    "fred": ("en+m2", 40, 145),
    "gina": ("en-us+f1", 75, 165),
    "hugo": ("en-gb-scotland+m4", 50, 150),
    "ivy": ("en-gb-x-rp+f3", 65, 155),
    "jack": ("en-029+m8", 42, 160),
}

AUDIO_OUTPUT_SYNCHRONOUS = 2
ESPEAK_RATE = 1
ESPEAK_VOLUME = 2
ESPEAK_PITCH = 3
ESPEAK_RANGE = 4
POS_CHARACTER = 1
ESPEAK_CHARS_AUTO = 0

SYNTH_CB = ctypes.CFUNCTYPE(ctypes.c_int, ctypes.POINTER(ctypes.c_short),
                            ctypes.c_int, ctypes.c_void_p)


class Speaker:
    def __init__(self):
        self.lib = ctypes.CDLL(espeakng_loader.get_library_path())
        data = espeakng_loader.get_data_path().encode()
        self.lib.espeak_Initialize.restype = ctypes.c_int
        self.rate = self.lib.espeak_Initialize(AUDIO_OUTPUT_SYNCHRONOUS, 0,
                                               ctypes.c_char_p(data), 0)
        if self.rate <= 0:
            raise RuntimeError("espeak_Initialize failed")
        self.chunks = []

        def on_audio(wav, n, _events):
            if n > 0:
                self.chunks.append(np.ctypeslib.as_array(wav, shape=(n,)).copy())
            return 0

        self.cb = SYNTH_CB(on_audio)
        self.lib.espeak_SetSynthCallback(self.cb)

    def say(self, text, voice, rate, pitch, pitch_range):
        if self.lib.espeak_SetVoiceByName(voice.encode()) != 0:
            raise RuntimeError(f"unknown voice {voice}")
        self.lib.espeak_SetParameter(ESPEAK_RATE, rate, 0)
        self.lib.espeak_SetParameter(ESPEAK_PITCH, pitch, 0)
        self.lib.espeak_SetParameter(ESPEAK_RANGE, pitch_range, 0)
        self.lib.espeak_SetParameter(ESPEAK_VOLUME, 100, 0)
        self.chunks = []
        buf = text.encode()
        self.lib.espeak_Synth(buf, len(buf) + 1, 0, POS_CHARACTER, 0,
                              ESPEAK_CHARS_AUTO, None, None)
        self.lib.espeak_Synchronize()
        return np.concatenate(self.chunks).astype(np.float64) / 32768.0


def trim(x, thresh=0.01):
    idx = np.flatnonzero(np.abs(x) > thresh)
    if idx.size == 0:
        return x
    return x[max(idx[0] - 80, 0):idx[-1] + 80]


def write_wav(path, x, fs):
    pcm = np.clip(np.round(x * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(fs)
        w.writeframes(pcm.tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--takes", type=int, default=10)
    ap.add_argument("--speakers", type=int, default=len(SPEAKERS))
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--fs", type=int, default=8000)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    tts = Speaker()
    g = np.gcd(args.fs, tts.rate)
    for name, (voice, pitch, rate) in list(SPEAKERS.items())[:args.speakers]:
        for digit, word in enumerate(WORDS):
            for take in range(args.takes):
                r = int(rate * rng.uniform(0.85, 1.15))
                p = int(np.clip(pitch + rng.integers(-8, 9), 0, 99))
                raw = tts.say(word, voice, r, p, int(rng.integers(30, 70)))
                x = resample_poly(trim(raw), args.fs // g, tts.rate // g)
                lead = np.zeros(int(rng.integers(0, args.fs // 20)))
                x = np.concatenate([lead, x])
                x *= rng.uniform(0.3, 0.9) / max(np.max(np.abs(x)), 1e-9)
                x += rng.normal(0.0, 0.003, x.size)
                write_wav(out / f"{digit}_{name}_{take}.wav", x, args.fs)


if __name__ == "__main__":
    main()
