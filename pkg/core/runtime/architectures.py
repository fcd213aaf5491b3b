# core/runtime/architectures.py
"""
Зарегистрированные архитектуры сетей: описания слоёв без весов.

Каждый слой - словарь с полями "name", "kind" и полями своего вида
(см. core/runtime/network.py, формат манифеста).
"""
from typing import Dict, Any, List, Callable, Sequence

LayerDescriptor = Dict[str, Any]

HYPANET_MODES = ("per_stage", "stage_input")


def _conv(name: str, in_ch: int, out_ch: int, size: int = 3, stride: int = 1, padding: int = 1,
          transpose: bool = False, padding_mode: str = "zeros") -> LayerDescriptor:
    return {"name": name, "kind": "conv", "in_ch": in_ch, "out_ch": out_ch, "size": size,
            "stride": stride, "padding": padding, "transpose": transpose, "padding_mode": padding_mode}


def net_k_layers(hidden: int = 16, beta_input: bool = True) -> List[LayerDescriptor]:
    """
    NET_K: 3 блока [conv 3×3, leaky-relu 0.01, conv 3×3] и завершающий ReLU.

    Вход - ядро (1 канал) и, при beta_input, постоянный канал β_K; выход - 1 канал.
    """
    in_ch = 2 if beta_input else 1
    layers: List[LayerDescriptor] = []
    for block in range(3):
        out_ch = 1 if block == 2 else hidden
        layers.append(_conv(f"k{block}_conv1", in_ch, hidden))
        layers.append({"name": f"k{block}_act", "kind": "leaky_relu", "slope": 0.01})
        layers.append(_conv(f"k{block}_conv2", hidden, out_ch))
        in_ch = hidden
    layers.append({"name": "k_out", "kind": "relu"})
    return layers


def _residual_units(prefix: str, channels: int, count: int, previous: str) -> List[LayerDescriptor]:
    layers: List[LayerDescriptor] = []
    for unit in range(count):
        layers.append(_conv(f"{prefix}_u{unit}_conv1", channels, channels))
        layers.append({"name": f"{prefix}_u{unit}_act", "kind": "relu"})
        layers.append(_conv(f"{prefix}_u{unit}_conv2", channels, channels))
        layers.append({"name": f"{prefix}_u{unit}_add", "kind": "skip_add", "source": previous})
        previous = f"{prefix}_u{unit}_add"
    return layers


def _last_name(layers: List[LayerDescriptor], default: str) -> str:
    return layers[-1]["name"] if layers else default


def net_x_layers(channels: Sequence[int] = (64, 128, 256, 512),
                 units_per_block: int = 4,
                 image_channels: int = 3,
                 beta_input: bool = True) -> List[LayerDescriptor]:
    """
    NET_X: U-Net из 7 блоков (3 вниз, тело, 3 вверх) с остаточными блоками.

    Понижение - свёртка 2×2 с шагом 2, повышение - транспонированная свёртка 2×2 с шагом 2.
    Перед каждым блоком подъёма и перед выходной свёрткой добавляется выход симметричного уровня.
    """
    if len(channels) != 4:
        raise ValueError(f"NET_X ожидает 4 значения каналов, получено {list(channels)}")
    c0, c1, c2, c3 = channels
    in_ch = image_channels + (1 if beta_input else 0)

    layers: List[LayerDescriptor] = [_conv("x_head", in_ch, c0)]
    level_outputs = ["x_head"]
    for level, (cin, cout) in enumerate(((c0, c1), (c1, c2), (c2, c3)), start=1):
        layers += _residual_units(f"x_down{level}", cin, units_per_block, _last_name(layers, "input"))
        layers.append(_conv(f"x_down{level}_pool", cin, cout, size=2, stride=2, padding=0))
        level_outputs.append(f"x_down{level}_pool")

    layers += _residual_units("x_body", c3, units_per_block, _last_name(layers, "input"))

    for level, (cin, cout) in zip((3, 2, 1), ((c3, c2), (c2, c1), (c1, c0))):
        layers.append({"name": f"x_up{level}_skip", "kind": "skip_add", "source": level_outputs[level]})
        layers.append(_conv(f"x_up{level}_unpool", cin, cout, size=2, stride=2, padding=0, transpose=True))
        layers += _residual_units(f"x_up{level}", cout, units_per_block, f"x_up{level}_unpool")

    layers.append({"name": "x_tail_skip", "kind": "skip_add", "source": level_outputs[0]})
    layers.append(_conv("x_tail", c0, image_channels))
    return layers


def hypanet_layers(hidden: int = 64, stages: int = 6, mode: str = "per_stage") -> List[LayerDescriptor]:
    """
    HYPANET: fc (s, σ[, t]) -> H, ReLU, fc H -> 4T (или 4), softplus.

    Порядок выходов этапа: α_K, α_X, β_K, β_X.
    """
    if mode not in HYPANET_MODES:
        raise ValueError(f"Неизвестный режим HypaNet: {mode}. Доступны: {HYPANET_MODES}")
    n_in = 2 if mode == "per_stage" else 3
    n_out = 4 * stages if mode == "per_stage" else 4
    return [
        {"name": "h_fc1", "kind": "fc", "in": n_in, "out": hidden},
        {"name": "h_act", "kind": "relu"},
        {"name": "h_fc2", "kind": "fc", "in": hidden, "out": n_out},
        {"name": "h_out", "kind": "softplus"},
    ]


_architecture_map: Dict[str, Callable[..., List[LayerDescriptor]]] = {
    "NET_K": net_k_layers,
    "NET_X": net_x_layers,
    "HYPANET": hypanet_layers,
}


def build_layers(architecture: str, params: Dict[str, Any]) -> List[LayerDescriptor]:
    builder = _architecture_map.get(architecture)
    if builder is None:
        raise ValueError(f"Неизвестная архитектура: {architecture}. Доступны: {list(_architecture_map)}")
    return builder(**params)


def registered_architectures() -> List[str]:
    return list(_architecture_map)
