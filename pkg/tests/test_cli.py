import json
import wave

import pytest

from flytts.runtime.cli import main, parse_tokens, text_to_tokens
from flytts.runtime.weights import save_weights


@pytest.fixture
def tiny_file(tmp_path, tiny_store):
    path = tmp_path / "tiny.flyw"
    path.write_bytes(save_weights(tiny_store))
    return path


@pytest.fixture(scope="module")
def mini_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("w") / "mini.flyw"
    assert main(["init", "--preset", "mini-fly-tts", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_parse_tokens_inline_and_file(tmp_path):
    assert parse_tokens("3,14, 15 9") == [3, 14, 15, 9]
    f = tmp_path / "ids.txt"
    f.write_text("1 2\n3\n")
    assert parse_tokens(str(f)) == [1, 2, 3]


def test_text_to_tokens():
    assert text_to_tokens("hi") == [104, 105]
    assert all(0 <= t < 256 for t in text_to_tokens("naïve"))


def test_init_is_deterministic(mini_file, tmp_path):
    again = tmp_path / "again.flyw"
    assert main(["init", "--preset", "mini-fly-tts", "--seed", "3", "--out", str(again)]) == 0
    assert again.read_bytes() == mini_file.read_bytes()


def test_synth_writes_wav(tiny_file, tmp_path, capsys):
    out = tmp_path / "a.wav"
    assert main(["synth", "--weights", str(tiny_file), "--tokens", "1,2,3,4", "--out", str(out)]) == 0
    with wave.open(str(out)) as w:
        assert (w.getnchannels(), w.getsampwidth(), w.getframerate()) == (1, 2, 22050)
        assert w.getnframes() > 0
    assert "wrote" in capsys.readouterr().out


def test_synth_text_input(mini_file, tmp_path):
    out = tmp_path / "t.wav"
    assert main(["synth", "--weights", str(mini_file), "--text", "hello", "--out", str(out)]) == 0
    assert out.stat().st_size > 44


def test_synth_seed_changes_output(tiny_file, tmp_path):
    outs = []
    for seed in (0, 0, 1):
        out = tmp_path / f"s{len(outs)}.wav"
        main(["synth", "--weights", str(tiny_file), "--tokens", "5 6 7", "--seed", str(seed),
              "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] != outs[2]


def test_synth_preset_mismatch(mini_file, tmp_path):
    rc = main(["synth", "--weights", str(mini_file), "--config-preset", "fly-tts",
               "--tokens", "1", "--out", str(tmp_path / "x.wav")])
    assert rc == 3


def test_params(mini_file, capsys):
    assert main(["params", "--weights", str(mini_file), "--breakdown"]) == 0
    out = capsys.readouterr().out.splitlines()
    total = int(out[-1].split()[-1])
    assert sum(int(line.split()[-1]) for line in out[:-1]) == total
    assert 8_000_000 < total < 14_000_000


def test_macs(capsys):
    assert main(["macs", "--preset", "fly-tts", "--frames", "100", "--tokens", "30"]) == 0
    out = capsys.readouterr().out
    assert "reference_decoder" in out and "total" in out


def test_bench_json_stdout(tiny_file, capsys):
    rc = main(["bench", "--weights", str(tiny_file), "--tokens", "1,2,3", "--repeats", "1",
               "--warmups", "0", "--json", "-"])
    assert rc == 0
    out = capsys.readouterr().out
    payload = json.loads(out[out.index("{"):])
    assert payload["rtf"] > 0 and payload["repeats"] == 1


def test_bench_compare_reference(mini_file, tmp_path):
    dest = tmp_path / "r.json"
    rc = main(["bench", "--weights", str(mini_file), "--tokens", "1,2", "--repeats", "1",
               "--warmups", "0", "--compare-reference", "--frames", "4", "--json", str(dest)])
    assert rc == 0
    extra = json.loads(dest.read_text())["extra"]
    assert extra["cmp.frames"] == 4 and extra["cmp.speedup"] > 0


@pytest.mark.parametrize("argv", [[], ["synth"], ["init", "--preset", "vits-large", "--out", "x"],
                                  ["macs", "--preset", "fly-tts", "--frames", "many"]])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_corrupt_weights_exit_3(tiny_file, tmp_path, capsys):
    blob = bytearray(tiny_file.read_bytes())
    blob[-3] ^= 0x40
    bad = tmp_path / "bad.flyw"
    bad.write_bytes(bytes(blob))
    assert main(["params", "--weights", str(bad)]) == 3
    assert "checksum" in capsys.readouterr().err


def test_missing_weights_exit_3(tmp_path):
    assert main(["params", "--weights", str(tmp_path / "nope.flyw")]) == 3


def test_bad_tokens_exit_3(tiny_file, tmp_path):
    out = str(tmp_path / "x.wav")
    assert main(["synth", "--weights", str(tiny_file), "--tokens", "a,b", "--out", out]) == 3
    assert main(["synth", "--weights", str(tiny_file), "--tokens", "999", "--out", out]) == 3


def test_macs_too_few_frames():
    assert main(["macs", "--preset", "fly-tts", "--frames", "1"]) == 3
