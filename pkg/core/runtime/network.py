# core/runtime/network.py
"""
Минимальный рантайм прямого прохода для сетей априорных шагов.

Формат весов (версия 1): JSON-манифест

    {"format": "udke-network", "version": 1,
     "architecture": "NET_K" | "NET_X" | "HYPANET" | "CUSTOM",
     "blob": "<имя файла весов относительно манифеста>",
     "beta_input": bool, "params": {...},
     "layers": [{"name": ..., "kind": ..., <поля вида>,
                 "weight": {"offset": <байты>, "shape": [...]} | null,
                 "bias": {"offset": <байты>, "shape": [...]} | null}, ...]}

и blob - подряд записанные float32 little-endian. Смещения в байтах, кратны 4.
Виды слоёв: conv (in_ch, out_ch, size, stride, padding, transpose, padding_mode:
zeros | circular | replicate; вес (out, in, size, size), у транспонированной (in, out, size, size)),
fc (in, out; вес (out, in)), relu, leaky_relu (slope), softplus, skip_add (source: имя слоя или "input").
Веса расширяются до float64 при загрузке, вычисления ведутся в float64.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.runtime.architectures import build_layers, LayerDescriptor
from core.utils.error_handling import NetworkFormatError

logger = logging.getLogger('UDKE')

FORMAT_NAME = "udke-network"
FORMAT_VERSION = 1
BLOB_DTYPE = np.dtype('<f4')

_PARAMETRIC_KINDS = ("conv", "fc")
_LAYER_FIELDS = {
    "conv": ("in_ch", "out_ch", "size", "stride", "padding", "transpose", "padding_mode"),
    "fc": ("in", "out"),
    "relu": (),
    "leaky_relu": ("slope",),
    "softplus": (),
    "skip_add": ("source",),
}
_PAD_MODES = {"zeros": "constant", "circular": "wrap", "replicate": "edge"}


class Layer:
    """
    Слой загруженной сети: описание и веса (float64).
    """
    def __init__(self, descriptor: LayerDescriptor,
                 weight: Optional[np.ndarray] = None,
                 bias: Optional[np.ndarray] = None):
        self.name = descriptor["name"]
        self.kind = descriptor["kind"]
        self.attrs = {key: value for key, value in descriptor.items()
                      if key not in ("name", "kind", "weight", "bias")}
        self.weight = weight
        self.bias = bias

    def expected_weight_shape(self) -> Optional[tuple]:
        if self.kind == "conv":
            size = self.attrs["size"]
            if self.attrs.get("transpose", False):
                return (self.attrs["in_ch"], self.attrs["out_ch"], size, size)
            return (self.attrs["out_ch"], self.attrs["in_ch"], size, size)
        if self.kind == "fc":
            return (self.attrs["out"], self.attrs["in"])
        return None

    def expected_bias_shape(self) -> Optional[tuple]:
        if self.kind == "conv":
            return (self.attrs["out_ch"],)
        if self.kind == "fc":
            return (self.attrs["out"],)
        return None

    def descriptor(self) -> LayerDescriptor:
        return {"name": self.name, "kind": self.kind, **self.attrs}

    def __repr__(self):
        return f"Layer(name='{self.name}', kind='{self.kind}', attrs={self.attrs})"


class Network:
    """
    Неизменяемая после загрузки сеть прямого прохода.
    """
    def __init__(self, architecture: str, layers: List[Layer], beta_input: bool = False,
                 params: Optional[Dict[str, Any]] = None):
        self.architecture = architecture
        self.layers = layers
        self.beta_input = beta_input
        self.params = params if params is not None else {}

    @property
    def parameter_count(self) -> int:
        return sum(layer.weight.size + (layer.bias.size if layer.bias is not None else 0)
                   for layer in self.layers if layer.weight is not None)

    @property
    def input_width(self) -> int:
        """Число входных каналов (свёрточные сети) или признаков (полносвязные)."""
        first = next(layer for layer in self.layers if layer.kind in _PARAMETRIC_KINDS)
        return first.attrs["in_ch"] if first.kind == "conv" else first.attrs["in"]

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        return forward(self, inputs)

    def __repr__(self):
        return (f"Network(architecture='{self.architecture}', layers={len(self.layers)}, "
                f"parameters={self.parameter_count}, beta_input={self.beta_input})")


def _conv_forward(x: np.ndarray, layer: Layer) -> np.ndarray:
    size, stride, padding = layer.attrs["size"], layer.attrs["stride"], layer.attrs["padding"]
    if layer.attrs.get("transpose", False):
        return _conv_transpose_forward(x, layer)
    if padding:
        mode = _PAD_MODES[layer.attrs.get("padding_mode", "zeros")]
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)), mode=mode)
    windows = sliding_window_view(x, (size, size), axis=(1, 2))[:, ::stride, ::stride]
    out = np.einsum('chwij,ocij->ohw', windows, layer.weight)
    if layer.bias is not None:
        out += layer.bias[:, None, None]
    return out


def _conv_transpose_forward(x: np.ndarray, layer: Layer) -> np.ndarray:
    size, stride, padding = layer.attrs["size"], layer.attrs["stride"], layer.attrs["padding"]
    _, h, w = x.shape
    full_h, full_w = (h - 1) * stride + size, (w - 1) * stride + size
    out = np.zeros((layer.attrs["out_ch"], full_h, full_w))
    for a in range(size):
        for b in range(size):
            contribution = np.einsum('chw,co->ohw', x, layer.weight[:, :, a, b])
            out[:, a:a + (h - 1) * stride + 1:stride, b:b + (w - 1) * stride + 1:stride] += contribution
    if padding:
        out = out[:, padding:full_h - padding, padding:full_w - padding]
    if layer.bias is not None:
        out += layer.bias[:, None, None]
    return out


def forward(net: Network, inputs: np.ndarray) -> np.ndarray:
    """
    Детерминированный прямой проход.

    Args:
        net: Загруженная сеть
        inputs: (C, H, W) для свёрточных сетей или вектор признаков для полносвязных

    Returns:
        Выход последнего слоя (float64)
    """
    x = np.asarray(inputs, dtype=np.float64)
    expected = net.input_width
    actual = x.shape[0]
    if actual != expected:
        raise NetworkFormatError(f"Сеть {net.architecture} ожидает {expected} входных каналов, получено {actual}")

    outputs: Dict[str, np.ndarray] = {"input": x}
    for layer in net.layers:
        if layer.kind == "conv":
            x = _conv_forward(x, layer)
        elif layer.kind == "fc":
            x = layer.weight @ x + (layer.bias if layer.bias is not None else 0.0)
        elif layer.kind == "relu":
            x = np.maximum(x, 0.0)
        elif layer.kind == "leaky_relu":
            x = np.where(x >= 0, x, layer.attrs["slope"] * x)
        elif layer.kind == "softplus":
            x = np.logaddexp(0.0, x)
        elif layer.kind == "skip_add":
            source = outputs[layer.attrs["source"]]
            if source.shape != x.shape:
                raise NetworkFormatError(f"Слой {layer.name}: форма {x.shape} не совпадает с {layer.attrs['source']} {source.shape}")
            x = x + source
        outputs[layer.name] = x
    return x


def _validate_graph(layers: List[Layer], architecture: str):
    """Проверяет виды слоёв, поля, согласованность каналов и ссылки skip_add."""
    width: Optional[int] = None
    widths: Dict[str, Optional[int]] = {"input": None}
    names = set()
    for layer in layers:
        if layer.kind not in _LAYER_FIELDS:
            raise NetworkFormatError(f"{architecture}: неизвестный вид слоя '{layer.kind}' ({layer.name})")
        missing = [field for field in _LAYER_FIELDS[layer.kind]
                   if field not in layer.attrs and field not in ("transpose", "padding_mode")]
        if missing:
            raise NetworkFormatError(f"{architecture}: у слоя {layer.name} нет полей {missing}")
        if layer.name in names or layer.name == "input":
            raise NetworkFormatError(f"{architecture}: повторяющееся имя слоя {layer.name}")
        names.add(layer.name)

        if layer.kind in _PARAMETRIC_KINDS:
            n_in = layer.attrs["in_ch"] if layer.kind == "conv" else layer.attrs["in"]
            n_out = layer.attrs["out_ch"] if layer.kind == "conv" else layer.attrs["out"]
            if width is None and widths["input"] is None:
                widths["input"] = n_in
            elif width is not None and n_in != width:
                raise NetworkFormatError(f"{architecture}: слой {layer.name} ожидает {n_in} каналов, приходит {width}")
            if layer.kind == "conv" and layer.attrs.get("padding_mode", "zeros") not in _PAD_MODES:
                raise NetworkFormatError(f"{architecture}: неизвестный режим паддинга {layer.attrs['padding_mode']}")
            width = n_out
        elif layer.kind == "skip_add":
            source = layer.attrs["source"]
            if source not in widths:
                raise NetworkFormatError(f"{architecture}: слой {layer.name} ссылается на неизвестный слой {source}")
            if widths[source] is not None and width is not None and widths[source] != width:
                raise NetworkFormatError(f"{architecture}: skip_add {layer.name} складывает {width} и {widths[source]} каналов")
        widths[layer.name] = width

        for tensor, expected, label in ((layer.weight, layer.expected_weight_shape(), "вес"),
                                        (layer.bias, layer.expected_bias_shape(), "смещение")):
            if expected is None:
                continue
            if label == "вес" and tensor is None:
                raise NetworkFormatError(f"{architecture}: у слоя {layer.name} нет весов")
            if tensor is not None and tuple(tensor.shape) != expected:
                raise NetworkFormatError(f"{architecture}: {label} слоя {layer.name} имеет форму {tensor.shape}, ожидается {expected}")
            if tensor is not None and not np.all(np.isfinite(tensor)):
                raise NetworkFormatError(f"{architecture}: {label} слоя {layer.name} содержит нечисловые значения")


def _validate_registered(architecture: str, params: Dict[str, Any], layers: List[Layer]):
    """Сверяет структуру слоёв с зарегистрированной архитектурой."""
    try:
        expected = build_layers(architecture, params)
    except (TypeError, ValueError) as e:
        raise NetworkFormatError(f"Некорректные параметры архитектуры {architecture}: {e}") from e
    if len(expected) != len(layers):
        raise NetworkFormatError(f"{architecture}: ожидается {len(expected)} слоёв, в манифесте {len(layers)}")
    for position, (want, layer) in enumerate(zip(expected, layers)):
        got = layer.descriptor()
        mismatched = [key for key, value in want.items() if got.get(key, _default_field(key)) != value]
        if mismatched:
            raise NetworkFormatError(f"{architecture}: слой #{position} ({layer.name}) расходится с архитектурой по полям {mismatched}")


def _default_field(key: str):
    return {"transpose": False, "padding_mode": "zeros"}.get(key)


def _read_tensor(blob: bytes, entry: Optional[Dict[str, Any]], layer_name: str) -> Optional[np.ndarray]:
    if entry is None:
        return None
    try:
        offset = int(entry["offset"])
        shape = tuple(int(dim) for dim in entry["shape"])
    except (KeyError, TypeError, ValueError) as e:
        raise NetworkFormatError(f"Слой {layer_name}: некорректное описание тензора ({e})") from e
    count = int(np.prod(shape)) if shape else 1
    if offset < 0 or offset % BLOB_DTYPE.itemsize:
        raise NetworkFormatError(f"Слой {layer_name}: смещение {offset} не кратно {BLOB_DTYPE.itemsize}")
    end = offset + count * BLOB_DTYPE.itemsize
    if end > len(blob):
        raise NetworkFormatError(f"Слой {layer_name}: blob обрезан (нужно {end} байт, есть {len(blob)})")
    values = np.frombuffer(blob, dtype=BLOB_DTYPE, count=count, offset=offset)
    return values.astype(np.float64).reshape(shape)


def load_network(manifest_path: Path, log: Optional[logging.Logger] = None) -> Network:
    """
    Загружает сеть из манифеста и blob весов.

    Raises:
        NetworkFormatError: Несовпадение форм, обрезанный blob, неизвестный вид слоя
        FileNotFoundError: Манифест или blob отсутствуют
    """
    log = log or logger
    manifest_path = Path(manifest_path)
    log.info(f"Загружаю сеть из манифеста: {manifest_path}")
    try:
        with open(manifest_path, 'r', encoding='utf-8') as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        log.error(f"Ошибка декодирования JSON манифеста {manifest_path}: {e}")
        raise NetworkFormatError(f"Манифест {manifest_path} не является корректным JSON: {e}") from e

    if manifest.get("format") != FORMAT_NAME or manifest.get("version") != FORMAT_VERSION:
        raise NetworkFormatError(f"Неподдерживаемый формат манифеста: {manifest.get('format')} v{manifest.get('version')}")
    architecture = manifest.get("architecture", "CUSTOM")
    params = manifest.get("params", {}) or {}
    blob_name = manifest.get("blob")
    if not blob_name:
        raise NetworkFormatError(f"В манифесте {manifest_path} не указан blob")
    blob = (manifest_path.parent / blob_name).read_bytes()

    layers = []
    for entry in manifest.get("layers", []):
        if "name" not in entry or "kind" not in entry:
            raise NetworkFormatError(f"Слой без имени или вида в манифесте {manifest_path}")
        layers.append(Layer(entry,
                            weight=_read_tensor(blob, entry.get("weight"), entry["name"]),
                            bias=_read_tensor(blob, entry.get("bias"), entry["name"])))
    if not layers:
        raise NetworkFormatError(f"Манифест {manifest_path} не содержит слоёв")

    _validate_graph(layers, architecture)
    if architecture != "CUSTOM":
        _validate_registered(architecture, params, layers)

    network = Network(architecture, layers, beta_input=bool(manifest.get("beta_input", False)), params=params)
    log.info(f"Сеть загружена: {network}")
    return network


def save_network(manifest_path: Path, network: Network) -> Path:
    """
    Записывает манифест и blob (<имя манифеста>.bin) в побайтно документированном формате.

    Returns:
        Путь к записанному blob
    """
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    blob_path = manifest_path.with_suffix(".bin")
    chunks: List[bytes] = []
    offset = 0
    layer_entries = []
    for layer in network.layers:
        entry = layer.descriptor()
        for key, tensor in (("weight", layer.weight), ("bias", layer.bias)):
            if tensor is None:
                entry[key] = None
                continue
            data = np.ascontiguousarray(tensor, dtype=BLOB_DTYPE).tobytes()
            entry[key] = {"offset": offset, "shape": list(tensor.shape)}
            chunks.append(data)
            offset += len(data)
        layer_entries.append(entry)

    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "architecture": network.architecture,
        "blob": blob_path.name,
        "beta_input": network.beta_input,
        "params": network.params,
        "layers": layer_entries,
    }
    blob_path.write_bytes(b"".join(chunks))
    with open(manifest_path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, ensure_ascii=False)
    return blob_path


def network_from_layers(architecture: str, descriptors: List[LayerDescriptor],
                        weights: Dict[str, np.ndarray], biases: Optional[Dict[str, np.ndarray]] = None,
                        beta_input: bool = False, params: Optional[Dict[str, Any]] = None) -> Network:
    """Собирает сеть из описаний слоёв и словарей весов (веса округляются до float32, как при сохранении)."""
    biases = biases or {}
    layers = []
    for descriptor in descriptors:
        name = descriptor["name"]
        weight = weights.get(name)
        bias = biases.get(name)
        layers.append(Layer(descriptor,
                            weight=None if weight is None else np.asarray(weight, dtype=BLOB_DTYPE).astype(np.float64),
                            bias=None if bias is None else np.asarray(bias, dtype=BLOB_DTYPE).astype(np.float64)))
    _validate_graph(layers, architecture)
    return Network(architecture, layers, beta_input=beta_input, params=params)


def random_network(architecture: str, rng: np.random.Generator, weight_scale: float = 1.0, **params) -> Network:
    """
    Случайно инициализированная зарегистрированная архитектура (нормальное распределение He).

    Args:
        architecture: "NET_K", "NET_X" или "HYPANET"
        rng: Генератор случайных чисел
        weight_scale: Множитель стандартного отклонения весов
        params: Параметры построителя архитектуры
    """
    params = dict(params)
    if architecture in ("NET_K", "NET_X"):
        params.setdefault("beta_input", True)
    descriptors = build_layers(architecture, params)
    weights: Dict[str, np.ndarray] = {}
    biases: Dict[str, np.ndarray] = {}
    for descriptor in descriptors:
        layer = Layer(descriptor)
        shape = layer.expected_weight_shape()
        if shape is None:
            continue
        if layer.kind == "conv":
            fan_in = descriptor["in_ch"] * descriptor["size"] ** 2
        else:
            fan_in = descriptor["in"]
        weights[layer.name] = rng.normal(0.0, weight_scale * np.sqrt(2.0 / fan_in), size=shape)
        biases[layer.name] = rng.normal(0.0, 0.01, size=layer.expected_bias_shape())
    return network_from_layers(architecture, descriptors, weights, biases,
                               beta_input=bool(params.get("beta_input", False)), params=params)
