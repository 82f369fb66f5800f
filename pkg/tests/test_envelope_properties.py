"""Property tests for the envelope invariants: roundtrip identity, the
two-key gate, and tamper evidence over random corpora."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssiot.envelope import (
    EnvelopeError,
    SealedData,
    generate_data_key,
    open_data,
    open_result,
    seal_data,
    seal_result,
)

payloads = st.binary(min_size=0, max_size=4096)


@settings(max_examples=50, deadline=None)
@given(payloads)
def test_seal_open_identity(app_keys, plaintext):
    key = generate_data_key()
    sealed = seal_data(plaintext, app_keys.public_key, key)
    assert open_data(sealed, key, app_keys.private_key) == plaintext


@settings(max_examples=50, deadline=None)
@given(payloads)
def test_result_roundtrip_identity(plaintext):
    key = generate_data_key()
    assert open_result(seal_result(plaintext, key), key) == plaintext


@settings(max_examples=25, deadline=None)
@given(payloads)
def test_two_key_gate(app_keys, other_app_keys, plaintext):
    """Exactly one of {data key, app private key} never suffices to open."""
    key = generate_data_key()
    sealed = seal_data(plaintext, app_keys.public_key, key)
    with pytest.raises(EnvelopeError):
        open_data(sealed, generate_data_key(), app_keys.private_key)
    with pytest.raises(EnvelopeError):
        open_data(sealed, key, other_app_keys.private_key)


@settings(max_examples=25, deadline=None)
@given(payloads, st.data())
def test_single_bit_flip_always_detected(app_keys, plaintext, data):
    key = generate_data_key()
    sealed = seal_data(plaintext, app_keys.public_key, key)
    fields = {"ciphertext": sealed.ciphertext, "nonce": sealed.nonce, "auth_tag": sealed.auth_tag}
    name = data.draw(st.sampled_from(sorted(fields)))
    victim = bytearray(fields[name])
    bit = data.draw(st.integers(min_value=0, max_value=len(victim) * 8 - 1))
    victim[bit // 8] ^= 1 << (bit % 8)
    fields[name] = bytes(victim)
    mutated = SealedData(fields["ciphertext"], fields["nonce"], fields["auth_tag"])
    with pytest.raises(EnvelopeError):
        open_data(mutated, key, app_keys.private_key)
