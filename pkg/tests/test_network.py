import json

import numpy as np
import pytest

from core.runtime.architectures import net_k_layers, registered_architectures
from core.runtime.network import random_network, save_network, load_network, network_from_layers, forward
from core.utils.error_handling import NetworkFormatError


def conv_loop(x, weight, bias, padding):
    """Свёртка PyTorch-семантики (взаимная корреляция, нулевой паддинг) циклами."""
    c, h, w = x.shape
    out_ch, _, size, _ = weight.shape
    padded = np.zeros((c, h + 2 * padding, w + 2 * padding))
    padded[:, padding:padding + h, padding:padding + w] = x
    out_h, out_w = h + 2 * padding - size + 1, w + 2 * padding - size + 1
    out = np.zeros((out_ch, out_h, out_w))
    for o in range(out_ch):
        for i in range(out_h):
            for j in range(out_w):
                total = bias[o]
                for ch in range(c):
                    for a in range(size):
                        for b in range(size):
                            total += weight[o, ch, a, b] * padded[ch, i + a, j + b]
                out[o, i, j] = total
    return out


def forward_loop(net, x):
    for layer in net.layers:
        if layer.kind == "conv":
            x = conv_loop(x, layer.weight, layer.bias, layer.attrs["padding"])
        elif layer.kind == "leaky_relu":
            x = np.where(x >= 0, x, layer.attrs["slope"] * x)
        elif layer.kind == "relu":
            x = np.maximum(x, 0.0)
    return x


def single_conv(weight, **attrs):
    descriptor = {"name": "c", "kind": "conv", "in_ch": weight.shape[0] if attrs.get("transpose") else weight.shape[1],
                  "out_ch": weight.shape[1] if attrs.get("transpose") else weight.shape[0],
                  "size": weight.shape[2], "stride": 1, "padding": 0}
    descriptor.update(attrs)
    return network_from_layers("CUSTOM", [descriptor], {"c": weight})


@pytest.fixture
def saved_net_k(rng, tmp_path):
    net = random_network("NET_K", rng, hidden=4)
    manifest = tmp_path / "net_k.json"
    save_network(manifest, net)
    return net, manifest


def rewrite_manifest(manifest, edit):
    data = json.loads(manifest.read_text(encoding='utf-8'))
    edit(data)
    manifest.write_text(json.dumps(data), encoding='utf-8')


class TestForward:
    def test_net_k_matches_direct_summation(self, rng):
        net = random_network("NET_K", rng, hidden=4)
        inputs = rng.random((2, 7, 7))
        np.testing.assert_allclose(forward(net, inputs), forward_loop(net, inputs), rtol=1e-10, atol=1e-12)

    def test_zero_weights_give_zero(self, rng):
        net = random_network("NET_K", rng, hidden=4)
        for layer in net.layers:
            if layer.weight is not None:
                layer.weight[:] = 0.0
                layer.bias[:] = 0.0
        np.testing.assert_array_equal(forward(net, rng.random((2, 5, 5))), np.zeros((1, 5, 5)))

    def test_delta_filter_is_identity(self, rng):
        weight = np.zeros((1, 1, 3, 3))
        weight[0, 0, 1, 1] = 1.0
        x = rng.random((1, 6, 6)).astype(np.float32).astype(np.float64)
        np.testing.assert_allclose(forward(single_conv(weight, padding=1), x), x, atol=1e-12)

    def test_circular_padding(self, rng):
        weight = np.zeros((1, 1, 3, 3))
        weight[0, 0, 1, 2] = 1.0
        x = rng.random((1, 5, 5))
        out = forward(single_conv(weight, padding=1, padding_mode="circular"), x)
        np.testing.assert_allclose(out, np.roll(x, -1, axis=2), atol=1e-12)

    def test_strided_average(self, rng):
        x = rng.random((1, 6, 8))
        out = forward(single_conv(np.full((1, 1, 2, 2), 0.25), stride=2), x)
        expected = x.reshape(1, 3, 2, 4, 2).mean(axis=(2, 4))
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_transposed_replicates_pixels(self, rng):
        x = rng.random((1, 3, 4))
        out = forward(single_conv(np.ones((1, 1, 2, 2)), stride=2, transpose=True), x)
        np.testing.assert_allclose(out, np.kron(x[0], np.ones((2, 2)))[None], atol=1e-12)

    def test_hypanet_outputs_are_positive(self, rng):
        net = random_network("HYPANET", rng, hidden=8, stages=6)
        out = forward(net, np.array([2.0, 7.65]))
        assert out.shape == (24,)
        assert np.all(out > 0)

    def test_wrong_input_width(self, rng):
        with pytest.raises(NetworkFormatError):
            forward(random_network("NET_K", rng, hidden=4), rng.random((3, 5, 5)))

    def test_registered_architectures(self):
        assert set(registered_architectures()) == {"NET_K", "NET_X", "HYPANET"}
        assert len(net_k_layers()) == 10


class TestSerialization:
    def test_round_trip_preserves_forward(self, rng, saved_net_k):
        net, manifest = saved_net_k
        loaded = load_network(manifest)
        inputs = rng.random((2, 7, 7))
        np.testing.assert_array_equal(forward(loaded, inputs), forward(net, inputs))
        assert loaded.parameter_count == net.parameter_count
        assert loaded.beta_input

    def test_truncated_blob(self, saved_net_k):
        _, manifest = saved_net_k
        blob = manifest.with_suffix(".bin")
        blob.write_bytes(blob.read_bytes()[:-8])
        with pytest.raises(NetworkFormatError):
            load_network(manifest)

    def test_unknown_layer_kind(self, saved_net_k):
        _, manifest = saved_net_k

        def edit(data):
            data["layers"][1]["kind"] = "gelu"

        rewrite_manifest(manifest, edit)
        with pytest.raises(NetworkFormatError):
            load_network(manifest)

    def test_weight_shape_mismatch(self, saved_net_k):
        _, manifest = saved_net_k

        def edit(data):
            data["layers"][0]["weight"]["shape"] = [4, 2, 1, 1]

        rewrite_manifest(manifest, edit)
        with pytest.raises(NetworkFormatError):
            load_network(manifest)

    def test_registered_structure_mismatch(self, saved_net_k):
        _, manifest = saved_net_k

        def edit(data):
            data["params"]["hidden"] = 8

        rewrite_manifest(manifest, edit)
        with pytest.raises(NetworkFormatError):
            load_network(manifest)

    def test_malformed_json(self, tmp_path):
        manifest = tmp_path / "broken.json"
        manifest.write_text("{not json", encoding='utf-8')
        with pytest.raises(NetworkFormatError):
            load_network(manifest)

    def test_missing_blob(self, saved_net_k):
        _, manifest = saved_net_k
        manifest.with_suffix(".bin").unlink()
        with pytest.raises(FileNotFoundError):
            load_network(manifest)
