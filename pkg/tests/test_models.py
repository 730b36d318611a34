import numpy as np
import pytest
import torch

from phoneclass.errors import BackendError, ConfigError, ContractError, PredictionError
from phoneclass.features.audio import WaveformWindow
from phoneclass.features.melspec import FeatureWindow
from phoneclass.models.checkpoint import (
    build_model,
    encoder_spec_from_dict,
    encoder_spec_to_dict,
    load_checkpoint,
    save_checkpoint,
)
from phoneclass.models.cnn import CnnEncoder, CnnEncoderConfig, ConvStage, cnn_forward
from phoneclass.models.head import ClassifierHead, ClassifierHeadConfig, PhoneClassifier, predict_phone
from phoneclass.models.ssl_backend import (
    SslBackendHandle,
    SslEncoder,
    frame_count,
    register_backend,
    resolve_backend,
    ssl_forward,
)

TOY = SslBackendHandle(backend_id="toy:test", hidden_layers=6, trainable=False, embedding_dim=32)


class TestCnnEncoder:
    def test_default_output_dim(self):
        config = CnnEncoderConfig()
        assert config.output_shape() == (128, 2, 30)
        assert config.output_dim == 7680

    def test_forward_shape(self):
        encoder = CnnEncoder(CnnEncoderConfig())
        out = encoder(torch.zeros(4, 11, 120))
        assert out.shape == (4, 7680)

    def test_wrong_input_shape_rejected(self):
        encoder = CnnEncoder(CnnEncoderConfig())
        with pytest.raises(ContractError):
            encoder(torch.zeros(4, 11, 60))

    def test_exactly_two_stages_enforced(self):
        with pytest.raises(ValueError):
            CnnEncoderConfig(conv_layers=(ConvStage(8),))

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            ConvStage(8, kernel=(4, 3))

    def test_config_dict_round_trip(self):
        config = CnnEncoderConfig(conv_layers=(ConvStage(8), ConvStage(16, pool=(1, 2))))
        again = CnnEncoderConfig.from_dict(config.to_dict())
        assert again == config

    def test_functional_wrapper(self):
        encoder = CnnEncoder(CnnEncoderConfig(conv_layers=(ConvStage(2), ConvStage(3))))
        window = FeatureWindow(values=np.zeros((11, 120)), center_frame_index=5)
        out = cnn_forward(window, encoder)
        assert out.shape == (encoder.output_dim,)


class TestSslBackend:
    def test_frame_count_geometry(self):
        assert frame_count(2032) == 6
        assert frame_count(400) == 1
        with pytest.raises(ContractError):
            frame_count(399)

    def test_size_names(self):
        assert TOY.size_name == "light"
        assert SslBackendHandle("toy:x", 12, False, 8).size_name == "base"
        assert SslBackendHandle("toy:x", 24, False, 8).size_name == "large"
        with pytest.raises(ValueError):
            SslBackendHandle("toy:x", 9, False, 8)

    def test_resolution_is_deterministic(self):
        a = resolve_backend(TOY)
        b = resolve_backend(TOY)
        assert a is not b
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert torch.equal(pa, pb)

    def test_different_ids_differ(self):
        other = SslBackendHandle("toy:other", 6, False, 32)
        a, b = resolve_backend(TOY), resolve_backend(other)
        assert any(not torch.equal(pa, pb) for pa, pb in zip(a.parameters(), b.parameters()))

    def test_frozen_handle_freezes_parameters(self):
        encoder = resolve_backend(TOY)
        assert all(not p.requires_grad for p in encoder.parameters())

    def test_trainable_handle_keeps_grads(self):
        handle = SslBackendHandle("toy:test", 6, True, 32)
        encoder = resolve_backend(handle)
        assert all(p.requires_grad for p in encoder.parameters())

    def test_output_dim_and_forward(self):
        encoder = resolve_backend(TOY)
        assert encoder.output_dim == 6 * 32
        out = encoder(torch.zeros(3, 2032))
        assert out.shape == (3, 192)

    def test_layer_index_selects_hidden_state(self):
        first = SslBackendHandle("toy:test", 6, False, 32, layer_index=0)
        e_first = resolve_backend(first)
        e_last = resolve_backend(TOY)
        wave = torch.randn(1, 2032, generator=torch.Generator().manual_seed(0))
        assert not torch.equal(e_first(wave), e_last(wave))

    def test_wrong_window_length_rejected(self):
        encoder = resolve_backend(TOY)
        with pytest.raises(ContractError):
            encoder(torch.zeros(1, 999))

    def test_unknown_family_rejected(self):
        with pytest.raises(BackendError, match="nope"):
            resolve_backend(SslBackendHandle("nope:x", 6, False, 32))

    def test_registry_extension(self):
        class Flat(torch.nn.Module):
            def __init__(self):
                super().__init__()
                self.scale = torch.nn.Parameter(torch.ones(1))

            def forward(self, wave):
                frames = frame_count(wave.shape[1])
                return [self.scale * torch.ones(wave.shape[0], frames, 4)]

        register_backend("flat", lambda handle: Flat())
        try:
            handle = SslBackendHandle("flat:x", 6, False, 4, layer_index=0)
            encoder = resolve_backend(handle)
            assert encoder(torch.zeros(2, 2032)).shape == (2, 24)
        finally:
            from phoneclass.models import ssl_backend

            del ssl_backend._REGISTRY["flat"]

    def test_functional_wrapper(self):
        window = WaveformWindow(samples=np.zeros(2032), center_s=0.1, sample_rate_hz=16000)
        out = ssl_forward(window, TOY)
        assert out.shape == (192,)


class TestClassifierHead:
    def test_default_dims_enforced(self):
        config = ClassifierHeadConfig()
        assert config.hidden_dims == (1024, 1024, 1024)
        assert config.n_classes == 32
        with pytest.raises(ValueError):
            ClassifierHeadConfig(hidden_dims=(512, 512, 512))
        with pytest.raises(ValueError):
            ClassifierHeadConfig(n_classes=31)

    def test_forward_shape(self):
        head = ClassifierHead(100, ClassifierHeadConfig())
        assert head(torch.zeros(5, 100)).shape == (5, 32)

    def test_width_mismatch_rejected(self):
        head = ClassifierHead(100, ClassifierHeadConfig())
        with pytest.raises(ContractError):
            head(torch.zeros(5, 99))

    def test_classifier_couples_dims(self):
        encoder = CnnEncoder(CnnEncoderConfig(conv_layers=(ConvStage(2), ConvStage(3))))
        head = ClassifierHead(encoder.output_dim, ClassifierHeadConfig())
        model = PhoneClassifier(encoder, head)
        assert model(torch.zeros(2, 11, 120)).shape == (2, 32)

    def test_dim_mismatch_rejected(self):
        encoder = CnnEncoder(CnnEncoderConfig())
        head = ClassifierHead(100, ClassifierHeadConfig())
        with pytest.raises(ContractError):
            PhoneClassifier(encoder, head)


class TestPredictPhone:
    def test_argmax(self):
        logits = np.zeros(32)
        logits[17] = 3.5
        assert predict_phone(logits) == 17

    def test_tie_breaks_to_lowest_index(self):
        logits = np.zeros(32)
        logits[[4, 9]] = 1.0
        assert predict_phone(logits) == 4

    def test_wrong_length_rejected(self):
        with pytest.raises(ContractError):
            predict_phone(np.zeros(31))

    def test_nan_rejected(self):
        logits = np.zeros(32)
        logits[0] = np.nan
        with pytest.raises(PredictionError):
            predict_phone(logits)


class TestCheckpoints:
    def test_spec_dict_round_trip(self):
        for spec in (CnnEncoderConfig(), TOY):
            data = encoder_spec_to_dict(spec)
            assert encoder_spec_from_dict(data) == spec

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            encoder_spec_from_dict({"kind": "rnn"})

    def test_seeded_build_is_reproducible(self):
        a = build_model(TOY, seed=11)
        b = build_model(TOY, seed=11)
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert torch.equal(pa, pb)
        c = build_model(TOY, seed=12)
        assert any(not torch.equal(pa, pc) for pa, pc in zip(a.parameters(), c.parameters()))

    def test_save_load_round_trip(self, tmp_path, inventory):
        model = build_model(TOY, seed=5)
        path = save_checkpoint(tmp_path / "m.pt", model, TOY, inventory.sha256(), extra={"note": 1})
        loaded, meta = load_checkpoint(path)
        assert meta["inventory_sha256"] == inventory.sha256()
        assert meta["extra"] == {"note": 1}
        x = torch.randn(2, 2032, generator=torch.Generator().manual_seed(3))
        model.eval()
        loaded.eval()
        with torch.no_grad():
            assert torch.equal(model(x), loaded(x))

    def test_loaded_frozen_encoder_stays_frozen(self, tmp_path, inventory):
        model = build_model(TOY, seed=5)
        path = save_checkpoint(tmp_path / "m.pt", model, TOY, inventory.sha256())
        loaded, _ = load_checkpoint(path)
        assert all(not p.requires_grad for p in loaded.encoder.parameters())
        assert isinstance(loaded.encoder, SslEncoder)
