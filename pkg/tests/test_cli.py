import json

import numpy as np
import pytest

from core.degradation.degradation import gen_gaussian_kernel
from core.domain.tensors import delta_kernel
from core.runtime.network import random_network, save_network
from core.utils.image_io import read_png, write_png
from core.utils.kernel_io import read_kernel, write_kernel
from interface.cli import run_cli


@pytest.fixture
def cli(udke_config, logger, translator):
    def _run(*argv):
        return run_cli([str(arg) for arg in argv], {}, udke_config, logger, translator)
    return _run


@pytest.fixture
def lr_image(tmp_path, make_image):
    path = tmp_path / "lr.png"
    write_png(path, make_image(1, 16, 16))
    return path


class TestGenKernels:
    def test_pool_is_reproducible(self, cli, tmp_path):
        assert cli("gen-kernels", "--out", tmp_path / "a", "--family", "gauss-iso", "--k", 7, "--count", 3,
                   "--seed", 5) == 0
        assert cli("gen-kernels", "--out", tmp_path / "b", "--family", "gauss-iso", "--k", 7, "--count", 3,
                   "--seed", 5) == 0
        first = sorted((tmp_path / "a").iterdir())
        assert [p.name for p in first] == ["kernel_000.txt", "kernel_001.txt", "kernel_002.txt"]
        for path in first:
            assert path.read_text() == (tmp_path / "b" / path.name).read_text()
            kern = read_kernel(path)
            np.testing.assert_allclose(kern, kern.T, atol=1e-15)
            assert kern.sum() == pytest.approx(1.0)

    def test_header_records_pool(self, cli, tmp_path):
        cli("gen-kernels", "--out", tmp_path, "--count", 1, "--k", 5, "--seed", 2)
        comments = [line for line in (tmp_path / "kernel_000.txt").read_text().splitlines() if line.startswith("#")]
        assert comments[0] == "# index 0"
        assert json.loads(comments[1][len("# pool "):])["seed"] == 2


class TestDegrade:
    def test_delta_kernel_is_identity(self, cli, tmp_path, make_image):
        hr = tmp_path / "hr.png"
        write_png(hr, make_image(3, 8, 8))
        kernel = tmp_path / "delta.txt"
        write_kernel(kernel, delta_kernel(3))
        out = tmp_path / "lr" / "out.png"
        assert cli("degrade", "--hr", hr, "--kernel", kernel, "--out", out, "--scale", 1, "--sigma", 0) == 0
        np.testing.assert_array_equal(read_png(out), read_png(hr))

        sidecar = json.loads(out.with_suffix(".json").read_text(encoding='utf-8'))
        assert sidecar["s"] == 1 and sidecar["k"] == 3 and sidecar["sigma255"] == 0.0
        assert sidecar["kernel_path"] == str(kernel)

    def test_rerun_is_byte_identical(self, cli, tmp_path, make_image):
        hr = tmp_path / "hr.png"
        write_png(hr, make_image(1, 16, 16))
        kernel = tmp_path / "k.txt"
        write_kernel(kernel, gen_gaussian_kernel(5, 1.2, 0.8, 0.3))
        outputs = []
        for name in ("one.png", "two.png"):
            assert cli("degrade", "--hr", hr, "--kernel", kernel, "--out", tmp_path / name, "--sigma", 7.5,
                       "--seed", 3, "--stream", 1) == 0
            outputs.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]
        assert read_png(tmp_path / "one.png").shape == (1, 8, 8)

    def test_missing_kernel_file(self, cli, tmp_path, make_image):
        hr = tmp_path / "hr.png"
        write_png(hr, make_image(1, 8, 8))
        assert cli("degrade", "--hr", hr, "--kernel", tmp_path / "absent.txt", "--out", tmp_path / "o.png") == 2


class TestEstimate:
    def test_outputs_and_trace(self, cli, tmp_path, lr_image, capsys):
        out = tmp_path / "est"
        assert cli("estimate", "--lr", lr_image, "--out", out, "--stages", 3, "--kernel-size", 7) == 0
        assert read_png(out / "lr_sr.png").shape == (1, 32, 32)
        assert read_kernel(out / "lr_kernel.txt").shape == (7, 7)
        trace = json.loads((out / "lr_trace.json").read_text(encoding='utf-8'))
        assert len(trace["stages"]) == 3
        assert trace["config"]["lambda"] == 10.0
        assert trace["config"]["scale"] == 2
        assert trace["seed"] == 0
        assert "Wrote SR image" in capsys.readouterr().out

    def test_missing_weights_are_noted(self, cli, tmp_path, lr_image):
        out = tmp_path / "est"
        assert cli("estimate", "--lr", lr_image, "--out", out, "--stages", 1, "--kernel-size", 5,
                   "--image-prior", "network") == 0
        trace = json.loads((out / "lr_trace.json").read_text(encoding='utf-8'))
        assert trace["image_prior"] == "image:classical"
        assert any("NET_X" in note for note in trace["notes"])

    def test_weights_from_manifest(self, cli, tmp_path, lr_image, rng):
        manifest = tmp_path / "weights" / "net_k.json"
        save_network(manifest, random_network("NET_K", rng, hidden=4))
        out = tmp_path / "est"
        assert cli("estimate", "--lr", lr_image, "--out", out, "--stages", 1, "--kernel-size", 5,
                   "--kernel-prior", "network", "--net-k", manifest) == 0
        trace = json.loads((out / "lr_trace.json").read_text(encoding='utf-8'))
        assert trace["kernel_prior"] == "kernel:network"

    def test_kernel_larger_than_image(self, cli, tmp_path, lr_image):
        assert cli("estimate", "--lr", lr_image, "--out", tmp_path / "est", "--kernel-size", 41) == 2

    def test_missing_input(self, cli, tmp_path):
        assert cli("estimate", "--lr", tmp_path / "absent.png", "--out", tmp_path / "est") == 2


class TestEvaluate:
    def test_empty_directory(self, cli, tmp_path):
        (tmp_path / "hr").mkdir()
        assert cli("evaluate", "--hr", tmp_path / "hr", "--out", tmp_path / "out") == 2

    def test_prints_aggregate(self, cli, tmp_path, make_image, capsys):
        hr = tmp_path / "hr"
        write_png(hr / "a.png", make_image(1, 24, 24))
        assert cli("evaluate", "--hr", hr, "--out", tmp_path / "out", "--stages", 1, "--kernel-size", 5) == 0
        assert "mean PSNR" in capsys.readouterr().out
        assert (tmp_path / "out" / "report.json").is_file()


class TestOracleCheck:
    def test_small_grid_passes(self, cli, tmp_path, capsys):
        report = tmp_path / "oracle.json"
        assert cli("oracle-check", "--sizes", "8", "--kernels", "1,3", "--scales", "1,2", "--channels", "1",
                   "--trials", 2, "--report", report) == 0
        out = capsys.readouterr().out
        assert "Grid size: 4 cells" in out
        assert "PASSED" in out
        assert json.loads(report.read_text(encoding='utf-8'))["grid_size"] == 4

    def test_perturbation_fails(self, cli, capsys):
        assert cli("oracle-check", "--sizes", "8", "--kernels", "3", "--scales", "2", "--channels", "1",
                   "--trials", 1, "--perturb") == 1
        assert "FAILED" in capsys.readouterr().out


class TestBench:
    def test_writes_report(self, cli, tmp_path):
        out = tmp_path / "bench.json"
        assert cli("bench", "--sizes", "16,16x24", "--kernel-size", 1, "--scale", 1, "--out", out) == 0
        data = json.loads(out.read_text(encoding='utf-8'))
        assert len(data["rows"]) == 3
        assert data["rows"][1]["w"] == 24
        assert data["rows"][-1]["measured"] is False


class TestArguments:
    def test_unknown_command(self, cli):
        with pytest.raises(SystemExit) as excinfo:
            cli("sharpen")
        assert excinfo.value.code == 2

    def test_bad_size_list(self, cli):
        with pytest.raises(SystemExit) as excinfo:
            cli("bench", "--sizes", "16xq")
        assert excinfo.value.code == 2
