"""Unit tests for the envelope crypto core."""

from __future__ import annotations

import pytest

from ssiot.envelope import (
    AuthenticationError,
    DataKey,
    InnerDecryptError,
    OuterDecryptError,
    PayloadTooLarge,
    SignatureError,
    WrappedKey,
    generate_app_keypair,
    generate_data_key,
    kms_unwrap,
    open_data,
    open_result,
    seal_data,
    seal_result,
    wrap_data_key,
)
from ssiot.envelope.sealing import SealedData, _sign, _verify


class TestKeyGeneration:
    def test_same_app_id_gives_distinct_material(self):
        a = generate_app_keypair("dup")
        b = generate_app_keypair("dup")
        assert a.private_key.private_numbers() != b.private_key.private_numbers()

    def test_pair_signs_and_verifies(self, app_keys):
        sig = _sign(b"message", app_keys.private_key)
        _verify(sig, b"message", app_keys.public_key)

    def test_pair_encrypt_decrypt_roundtrip(self, app_keys):
        from ssiot.envelope.sealing import _asym_decrypt, _asym_encrypt

        blob = _asym_encrypt(b"round trip", app_keys.public_key)
        assert _asym_decrypt(blob, app_keys.private_key) == b"round trip"

    def test_empty_app_id_rejected(self):
        with pytest.raises(ValueError):
            generate_app_keypair("")

    def test_data_key_length(self):
        assert len(generate_data_key().key_bytes) == 32

    def test_data_keys_distinct(self):
        keys = {generate_data_key().key_bytes for _ in range(1000)}
        assert len(keys) == 1000

    def test_data_key_no_constant_byte_position(self):
        sample = [generate_data_key().key_bytes for _ in range(1000)]
        for pos in range(32):
            assert len({k[pos] for k in sample}) > 1

    def test_data_key_repr_hides_material(self):
        key = generate_data_key()
        assert key.key_bytes.hex() not in repr(key)


class TestSealOpen:
    def test_roundtrip(self, app_keys):
        key = generate_data_key()
        sealed = seal_data(b"camera frame bytes", app_keys.public_key, key)
        assert open_data(sealed, key, app_keys.private_key) == b"camera frame bytes"

    def test_wrong_data_key_fails_authentication(self, app_keys):
        sealed = seal_data(b"secret", app_keys.public_key, generate_data_key())
        with pytest.raises(AuthenticationError):
            open_data(sealed, generate_data_key(), app_keys.private_key)

    def test_wrong_app_key_fails_inner_layer(self, app_keys, other_app_keys):
        key = generate_data_key()
        sealed = seal_data(b"secret", app_keys.public_key, key)
        with pytest.raises(InnerDecryptError):
            open_data(sealed, key, other_app_keys.private_key)

    def test_oversize_payload_rejected(self, app_keys):
        with pytest.raises(PayloadTooLarge):
            seal_data(b"x" * 100, app_keys.public_key, generate_data_key(), max_payload=99)

    def test_payload_at_limit_accepted(self, app_keys):
        key = generate_data_key()
        sealed = seal_data(b"x" * 99, app_keys.public_key, key, max_payload=99)
        assert open_data(sealed, key, app_keys.private_key) == b"x" * 99


class TestWrapUnwrap:
    def test_roundtrip_both_layers(self, app_keys, kms_keys):
        key = generate_data_key()
        wrapped = wrap_data_key(key, app_keys, kms_keys.public_key, kms_keys.kms_id)
        out = kms_unwrap(wrapped, kms_keys.private_key, app_keys.public_key, app_keys.private_key)
        assert out.key_bytes == key.key_bytes

    def test_tampered_ciphertext_fails(self, app_keys, kms_keys):
        wrapped = wrap_data_key(generate_data_key(), app_keys, kms_keys.public_key, kms_keys.kms_id)
        flipped = bytearray(wrapped.ciphertext)
        flipped[len(flipped) // 2] ^= 0x01
        bad = WrappedKey(bytes(flipped), wrapped.signature, wrapped.signer_app_id, wrapped.kms_id)
        with pytest.raises(OuterDecryptError):
            kms_unwrap(bad, kms_keys.private_key, app_keys.public_key, app_keys.private_key)

    def test_forged_signature_detected(self, app_keys, other_app_keys, kms_keys):
        # wrapped by other_app's keys but claimed to come from app_keys
        wrapped = wrap_data_key(generate_data_key(), other_app_keys, kms_keys.public_key, kms_keys.kms_id)
        with pytest.raises(SignatureError):
            kms_unwrap(wrapped, kms_keys.private_key, app_keys.public_key, app_keys.private_key)

    def test_wrong_kms_key_is_outer_failure(self, app_keys, kms_keys, other_kms_keys):
        wrapped = wrap_data_key(generate_data_key(), app_keys, other_kms_keys.public_key, "other")
        with pytest.raises(OuterDecryptError):
            kms_unwrap(wrapped, kms_keys.private_key, app_keys.public_key, app_keys.private_key)

    def test_stripped_signature_is_signature_failure(self, app_keys, kms_keys):
        wrapped = wrap_data_key(generate_data_key(), app_keys, kms_keys.public_key, kms_keys.kms_id)
        stripped = WrappedKey(wrapped.ciphertext, b"", wrapped.signer_app_id, wrapped.kms_id)
        with pytest.raises(SignatureError):
            kms_unwrap(stripped, kms_keys.private_key, app_keys.public_key, app_keys.private_key)


class TestResultSealing:
    def test_roundtrip(self):
        key = generate_data_key()
        sealed = seal_result(b'{"label": "person", "score": 0.9}', key)
        assert open_result(sealed, key) == b'{"label": "person", "score": 0.9}'

    def test_other_requests_key_fails(self):
        sealed = seal_result(b"result", generate_data_key())
        with pytest.raises(AuthenticationError):
            open_result(sealed, generate_data_key())

    def test_empty_result_roundtrip(self):
        key = generate_data_key()
        assert open_result(seal_result(b"", key), key) == b""

    def test_tampered_tag_fails(self):
        key = generate_data_key()
        sealed = seal_result(b"result", key)
        flipped = bytearray(sealed.auth_tag)
        flipped[0] ^= 0x80
        with pytest.raises(AuthenticationError):
            open_result(SealedData(sealed.ciphertext, sealed.nonce, bytes(flipped)), key)


def test_bad_data_key_length_rejected():
    with pytest.raises(ValueError):
        DataKey(key_bytes=b"short")
