"""Extrator de características convolucional com cabeça fully-connected treinável.

Forward e backward manuais em numpy, float64. As camadas convolucionais ficam
congeladas durante o rastreamento; só fc6 e fc7 recebem gradientes online.
"""

import logging
import uuid
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DimensionMismatchError, NetworkConfigError, NumericError, StaleCacheError
from ..imaging.image_io import ImageBuffer

logger = logging.getLogger(__name__)

# Pixels são levados a [0, 1] e centrados subtraindo esta constante
PIXEL_MEAN = 0.5

FC_PARAMS = ("fc6.weight", "fc6.bias", "fc7.weight", "fc7.bias")
ACTIVATIONS = ("relu", "identity")
DEFAULT_CHUNK = 64


@dataclass(frozen=True)
class ConvStage:
    """Estágio conv (kernel x kernel, stride, canais de saída) seguido de ReLU e max-pool 2x2."""

    kernel: int
    stride: int
    out_channels: int

    def __str__(self) -> str:
        return f"{self.kernel}x{self.kernel}/{self.stride}/{self.out_channels}"


DEFAULT_CONV_SPEC = (ConvStage(5, 1, 8), ConvStage(3, 1, 16), ConvStage(3, 1, 32))


def parse_conv_spec(text: str) -> Tuple[ConvStage, ...]:
    """
    Converte '5x5/1/8,3x3/1/16' em uma tupla de ConvStage.

    Raises:
        NetworkConfigError: Se algum estágio estiver malformado
    """
    stages = []
    for index, item in enumerate(part.strip() for part in text.split(",") if part.strip()):
        try:
            kernel_text, stride_text, channels_text = item.split("/")
            kh, kw = kernel_text.lower().split("x")
            if kh != kw:
                raise ValueError("kernel não quadrado")
            stages.append(ConvStage(int(kh), int(stride_text), int(channels_text)))
        except ValueError as e:
            raise NetworkConfigError(f"Estágio conv{index + 1} malformado '{item}': {e}", stage=f"conv{index + 1}") from e
    return tuple(stages)


def format_conv_spec(stages: Iterable[ConvStage]) -> str:
    return ",".join(str(stage) for stage in stages)


@dataclass(frozen=True)
class NetworkConfig:
    """
    Arquitetura do backbone.

    Attributes:
        input_size: Lado do patch de entrada em pixels
        input_channels: Canais do patch (1 = cinza)
        conv_spec: Estágios convolucionais
        fc6_dim: Largura de fc6
        feature_dim: Dimensão N do vetor x (saída de fc7)
        fc7_activation: 'relu' ou 'identity'
        seed: Semente de inicialização
    """

    input_size: int = 64
    input_channels: int = 1
    conv_spec: Tuple[ConvStage, ...] = DEFAULT_CONV_SPEC
    fc6_dim: int = 128
    feature_dim: int = 64
    fc7_activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        for name in ("input_size", "input_channels", "fc6_dim", "feature_dim"):
            if getattr(self, name) < 1:
                raise NetworkConfigError(f"{name} deve ser >= 1 (recebido: {getattr(self, name)})", stage=name)
        if self.fc7_activation not in ACTIVATIONS:
            raise NetworkConfigError(f"fc7_activation inválida: {self.fc7_activation}", stage="fc7")
        for index, stage in enumerate(self.conv_spec):
            if min(stage.kernel, stage.stride, stage.out_channels) < 1:
                raise NetworkConfigError(f"Estágio conv{index + 1} com valores < 1: {stage}", stage=f"conv{index + 1}")

    def stage_sizes(self) -> List[Tuple[int, int]]:
        """
        Calcula (canais, lado) após cada estágio conv + pool.

        Raises:
            NetworkConfigError: Se o tamanho espacial colapsar abaixo de 1
        """
        sizes = []
        channels, side = self.input_channels, self.input_size
        for index, stage in enumerate(self.conv_spec):
            name = f"conv{index + 1}"
            if side < stage.kernel:
                raise NetworkConfigError(
                    f"Estágio {name}: entrada {side}x{side} menor que kernel {stage.kernel}", stage=name
                )
            side = (side - stage.kernel) // stage.stride + 1
            if side < 2:
                raise NetworkConfigError(f"Estágio {name}: max-pool 2x2 reduziria {side}x{side} abaixo de 1", stage=name)
            side //= 2
            channels = stage.out_channels
            sizes.append((channels, side))
        return sizes

    @property
    def flat_dim(self) -> int:
        sizes = self.stage_sizes()
        if not sizes:
            return self.input_channels * self.input_size * self.input_size
        channels, side = sizes[-1]
        return channels * side * side

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        """Shapes esperados de cada parâmetro, na ordem canônica."""
        shapes: Dict[str, Tuple[int, ...]] = {}
        in_channels = self.input_channels
        for index, stage in enumerate(self.conv_spec):
            name = f"conv{index + 1}"
            shapes[f"{name}.weight"] = (stage.out_channels, in_channels, stage.kernel, stage.kernel)
            shapes[f"{name}.bias"] = (stage.out_channels,)
            in_channels = stage.out_channels
        shapes["fc6.weight"] = (self.fc6_dim, self.flat_dim)
        shapes["fc6.bias"] = (self.fc6_dim,)
        shapes["fc7.weight"] = (self.feature_dim, self.fc6_dim)
        shapes["fc7.bias"] = (self.feature_dim,)
        return shapes


@dataclass(eq=False)
class Network:
    """
    Pesos do backbone.

    Attributes:
        config: Arquitetura
        params: Parâmetros por nome (convN.weight/bias, fc6.*, fc7.*)
        version: Incrementado a cada atualização; invalida caches antigos
    """

    config: NetworkConfig
    params: Dict[str, np.ndarray]
    version: int = 0
    token: str = field(default_factory=lambda: uuid.uuid4().hex)

    def copy(self) -> "Network":
        return Network(
            config=self.config,
            params={name: value.copy() for name, value in self.params.items()},
            version=self.version,
        )

    @property
    def conv_params(self) -> List[str]:
        return [name for name in self.params if name.startswith("conv")]


@dataclass
class ConvStageCache:
    inputs: np.ndarray
    pre_activation: np.ndarray
    pool_index: np.ndarray


@dataclass
class ForwardCache:
    """Ativações guardadas pelo forward para os backwards."""

    token: str
    version: int
    h0: np.ndarray
    z6: np.ndarray
    h6: np.ndarray
    z7: np.ndarray
    features: np.ndarray
    conv_stages: Optional[List[ConvStageCache]] = None

    @property
    def batch_size(self) -> int:
        return self.features.shape[0]


FcGradients = Dict[str, np.ndarray]


def init_network(config: NetworkConfig, seed: Optional[int] = None) -> Network:
    """
    Inicializa os pesos de forma determinística.

    Pesos uniformes em [-sqrt(6/fan_in), sqrt(6/fan_in)], bias zero.

    Args:
        config: Arquitetura
        seed: Semente (usa config.seed se omitida)

    Returns:
        Network: Rede inicializada

    Raises:
        NetworkConfigError: Se a arquitetura colapsar espacialmente
    """
    seed = config.seed if seed is None else seed
    config = replace(config, seed=seed)
    shapes = config.param_shapes()
    rng = np.random.default_rng(seed)

    params: Dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        if name.endswith(".bias"):
            params[name] = np.zeros(shape, dtype=np.float64)
        else:
            fan_in = int(np.prod(shape[1:]))
            limit = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-limit, limit, size=shape)

    logger.debug(f"Rede inicializada: conv={format_conv_spec(config.conv_spec)}, flat={config.flat_dim}, "
                 f"fc6={config.fc6_dim}, N={config.feature_dim}, seed={seed}")
    return Network(config=config, params=params)


def _conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, stride: int) -> np.ndarray:
    kernel = weight.shape[2]
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    out = np.tensordot(windows, weight, axes=([1, 4, 5], [1, 2, 3]))
    return out.transpose(0, 3, 1, 2) + bias[None, :, None, None]


def _conv2d_backward(
    x: np.ndarray, weight: np.ndarray, stride: int, dout: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    kernel = weight.shape[2]
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    dweight = np.tensordot(dout, windows, axes=([0, 2, 3], [0, 2, 3]))
    dbias = dout.sum(axis=(0, 2, 3))

    dx = np.zeros_like(x)
    out_h, out_w = dout.shape[2:]
    for i in range(kernel):
        for j in range(kernel):
            contribution = np.einsum("bohw,oc->bchw", dout, weight[:, :, i, j])
            dx[:, :, i:i + stride * (out_h - 1) + 1:stride, j:j + stride * (out_w - 1) + 1:stride] += contribution
    return dx, dweight, dbias


def _maxpool2x2(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    batch, channels, height, width = x.shape
    ph, pw = height // 2, width // 2
    blocks = (
        x[:, :, :2 * ph, :2 * pw]
        .reshape(batch, channels, ph, 2, pw, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, ph, pw, 4)
    )
    index = blocks.argmax(axis=4)
    out = np.take_along_axis(blocks, index[..., None], axis=4)[..., 0]
    return out, index


def _maxpool2x2_backward(dout: np.ndarray, index: np.ndarray, input_shape: Tuple[int, ...]) -> np.ndarray:
    batch, channels, ph, pw = dout.shape
    dblocks = np.zeros((batch, channels, ph, pw, 4), dtype=np.float64)
    np.put_along_axis(dblocks, index[..., None], dout[..., None], axis=4)
    dx = np.zeros(input_shape, dtype=np.float64)
    dx[:, :, :2 * ph, :2 * pw] = (
        dblocks.reshape(batch, channels, ph, pw, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(batch, channels, 2 * ph, 2 * pw)
    )
    return dx


def _normalize(net: Network, patches: np.ndarray) -> np.ndarray:
    """Converte patches uint8 (K, H, W[, C]) em float64 (K, C, H, W) centrados."""
    config = net.config
    array = np.asarray(patches)
    if array.ndim == 3:
        array = array[..., None]
    expected = (config.input_size, config.input_size, config.input_channels)
    if array.ndim != 4 or array.shape[1:] != expected:
        raise DimensionMismatchError(f"Patches com shape {array.shape[1:]}, esperado {expected}")
    return array.astype(np.float64).transpose(0, 3, 1, 2) / 255.0 - PIXEL_MEAN


def conv_forward(net: Network, inputs: np.ndarray, keep: bool = False) -> Tuple[np.ndarray, Optional[List[ConvStageCache]]]:
    """
    Executa a pilha convolucional sobre entradas normalizadas (K, C, H, W).

    Returns:
        Tupla (saída achatada (K, flat_dim), caches por estágio se keep=True)
    """
    caches: Optional[List[ConvStageCache]] = [] if keep else None
    x = inputs
    for index, stage in enumerate(net.config.conv_spec):
        name = f"conv{index + 1}"
        z = _conv2d(x, net.params[f"{name}.weight"], net.params[f"{name}.bias"], stage.stride)
        pooled, pool_index = _maxpool2x2(np.maximum(z, 0.0))
        if caches is not None:
            caches.append(ConvStageCache(inputs=x, pre_activation=z, pool_index=pool_index))
        x = pooled
    return x.reshape(x.shape[0], -1), caches


def fc_forward(net: Network, h0: np.ndarray, conv_stages: Optional[List[ConvStageCache]] = None) -> ForwardCache:
    """
    Executa fc6 (ReLU) e fc7 (ReLU ou identidade) sobre a saída convolucional achatada.

    Args:
        net: Rede
        h0: Saída convolucional (K, flat_dim)
        conv_stages: Caches convolucionais a anexar (para backward_full)

    Returns:
        ForwardCache: Ativações, com as características em cache.features
    """
    if h0.ndim != 2 or h0.shape[1] != net.config.flat_dim:
        raise DimensionMismatchError(f"Entrada fc6 com shape {h0.shape}, esperado (K, {net.config.flat_dim})")
    params = net.params
    z6 = h0 @ params["fc6.weight"].T + params["fc6.bias"]
    h6 = np.maximum(z6, 0.0)
    z7 = h6 @ params["fc7.weight"].T + params["fc7.bias"]
    features = np.maximum(z7, 0.0) if net.config.fc7_activation == "relu" else z7.copy()
    return ForwardCache(
        token=net.token, version=net.version, h0=h0, z6=z6, h6=h6, z7=z7, features=features, conv_stages=conv_stages
    )


def extract_features(
    net: Network, patches: np.ndarray, keep_conv: bool = False, chunk: int = DEFAULT_CHUNK
) -> Tuple[np.ndarray, ForwardCache]:
    """
    Forward em lote, processado em blocos para limitar a memória.

    Args:
        net: Rede
        patches: Array uint8 (K, H, W) ou (K, H, W, C)
        keep_conv: Guarda ativações convolucionais para backward_full
        chunk: Tamanho de bloco

    Returns:
        Tupla (características (K, N), ForwardCache)

    Raises:
        DimensionMismatchError: Se o shape dos patches não corresponder a input_size
    """
    if keep_conv:
        h0, stages = conv_forward(net, _normalize(net, patches), keep=True)
        cache = fc_forward(net, h0, conv_stages=stages)
    else:
        cache = fc_forward(net, conv_features(net, patches, chunk=chunk))
    return cache.features, cache


def conv_features(net: Network, patches: np.ndarray, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """
    Saída convolucional achatada (K, flat_dim) de patches uint8, em blocos.

    Como as camadas conv não mudam durante o rastreamento, o resultado pode ser
    reaproveitado em vários fc_forward sobre o mesmo lote.
    """
    inputs = _normalize(net, patches)
    flats = [conv_forward(net, inputs[start:start + chunk])[0] for start in range(0, inputs.shape[0], chunk)]
    return np.concatenate(flats, axis=0) if flats else np.zeros((0, net.config.flat_dim))


def forward_features(net: Network, patch: ImageBuffer) -> Tuple[np.ndarray, ForwardCache]:
    """
    Calcula o vetor de características x de um patch.

    Args:
        net: Rede
        patch: Patch com lado input_size e input_channels canais

    Returns:
        Tupla (x de comprimento N, ForwardCache)

    Raises:
        DimensionMismatchError: Se o patch não tiver as dimensões da configuração
    """
    config = net.config
    if (patch.width, patch.height, patch.channels) != (config.input_size, config.input_size, config.input_channels):
        raise DimensionMismatchError(
            f"Patch {patch.width}x{patch.height}x{patch.channels}, esperado "
            f"{config.input_size}x{config.input_size}x{config.input_channels}"
        )
    features, cache = extract_features(net, patch.data[None])
    return features[0], cache


def _check_cache(net: Network, cache: ForwardCache) -> None:
    if cache.token != net.token or cache.version != net.version:
        raise StaleCacheError(
            f"ForwardCache obsoleto (rede {cache.token[:8]} v{cache.version}, atual {net.token[:8]} v{net.version})"
        )


def _fc_backward(net: Network, cache: ForwardCache, grad_x: np.ndarray) -> Tuple[FcGradients, np.ndarray]:
    _check_cache(net, cache)
    grad = np.asarray(grad_x, dtype=np.float64)
    if grad.ndim == 1:
        grad = grad[None, :]
    if grad.shape != cache.features.shape:
        raise DimensionMismatchError(f"grad_x com shape {np.shape(grad_x)}, esperado {cache.features.shape}")

    params = net.params
    dz7 = grad * (cache.z7 > 0.0) if net.config.fc7_activation == "relu" else grad
    dh6 = dz7 @ params["fc7.weight"]
    dz6 = dh6 * (cache.z6 > 0.0)
    grads = {
        "fc6.weight": dz6.T @ cache.h0,
        "fc6.bias": dz6.sum(axis=0),
        "fc7.weight": dz7.T @ cache.h6,
        "fc7.bias": dz7.sum(axis=0),
    }
    dh0 = dz6 @ params["fc6.weight"]
    return grads, dh0


def backward_fc(net: Network, cache: ForwardCache, grad_x: np.ndarray) -> FcGradients:
    """
    Propaga grad_x até fc6/fc7; gradientes convolucionais não são calculados.

    Args:
        net: Rede usada no forward
        cache: Cache do forward correspondente
        grad_x: Gradiente em relação a x, (N,) ou (K, N); somado sobre o lote

    Returns:
        Dict com gradientes de fc6.weight, fc6.bias, fc7.weight, fc7.bias

    Raises:
        StaleCacheError: Se a rede mudou desde o forward
        DimensionMismatchError: Se grad_x não corresponder ao cache
    """
    grads, _ = _fc_backward(net, cache, grad_x)
    return grads


def backward_full(net: Network, cache: ForwardCache, grad_x: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Backward por todas as camadas, convolucionais incluídas (pré-treino de objectness).

    Raises:
        StaleCacheError: Se o cache não guardou ativações convolucionais
    """
    if cache.conv_stages is None:
        raise StaleCacheError("ForwardCache sem ativações convolucionais (use keep_conv=True)")
    grads, dh0 = _fc_backward(net, cache, grad_x)

    stages = cache.conv_stages
    channels, side = net.config.stage_sizes()[-1] if stages else (net.config.input_channels, net.config.input_size)
    upstream = dh0.reshape(dh0.shape[0], channels, side, side)
    for index in range(len(stages) - 1, -1, -1):
        stage_cache = stages[index]
        name = f"conv{index + 1}"
        stride = net.config.conv_spec[index].stride
        drelu = _maxpool2x2_backward(upstream, stage_cache.pool_index, stage_cache.pre_activation.shape)
        dz = drelu * (stage_cache.pre_activation > 0.0)
        upstream, grads[f"{name}.weight"], grads[f"{name}.bias"] = _conv2d_backward(
            stage_cache.inputs, net.params[f"{name}.weight"], stride, dz
        )
    return grads


def clip_gradients(grads: Dict[str, np.ndarray], max_norm: Optional[float]) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Reescala os gradientes para norma L2 global <= max_norm.

    Returns:
        Tupla (gradientes possivelmente reescalados, norma original)
    """
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if max_norm is None or max_norm <= 0 or not np.isfinite(norm) or norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm


def apply_sgd(net: Network, grads: Dict[str, np.ndarray], learning_rate: float, include_conv: bool = False) -> Network:
    """
    Passo de descida: params <- params - lr * grad (in place).

    Args:
        net: Rede a atualizar
        grads: Gradientes por nome de parâmetro
        learning_rate: Taxa de aprendizado (> 0)
        include_conv: Também atualiza camadas conv (apenas no pré-treino)

    Returns:
        Network: A própria rede, atualizada

    Raises:
        ValueError: Se learning_rate <= 0
        NumericError: Se algum gradiente não for finito (nada é alterado)
    """
    if not learning_rate > 0:
        raise ValueError(f"learning_rate deve ser maior que 0 (recebido: {learning_rate})")

    names = [name for name in grads if name in FC_PARAMS or (include_conv and name in net.params)]
    for name in names:
        if grads[name].shape != net.params[name].shape:
            raise DimensionMismatchError(f"Gradiente de {name} com shape {grads[name].shape}, esperado {net.params[name].shape}")
        if not np.all(np.isfinite(grads[name])):
            raise NumericError(f"Gradiente não finito em {name}; atualização rejeitada")

    for name in names:
        net.params[name] -= learning_rate * grads[name]
    net.version += 1
    return net


def networks_equal(a: Network, b: Network) -> bool:
    """Compara configuração e parâmetros bit a bit."""
    if a.config != b.config or list(a.params) != list(b.params):
        return False
    return all(
        a.params[name].shape == b.params[name].shape and a.params[name].tobytes() == b.params[name].tobytes()
        for name in a.params
    )
