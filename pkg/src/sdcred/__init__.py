"""Selective-disclosure credentials.

Credentials are Merkle trees whose leaves are salted Pedersen commitments;
issuers sign the root with BLS. Holders present any subset of attributes,
prove ranges over hidden integer attributes with Bulletproofs, and combine
several credentials under one aggregated signature.
"""
from .bls import PossessionProof, PrivateKey, PublicKey, Signature, keygen
from .credential import (
    Credential,
    CredentialBatch,
    IssuanceRecord,
    co_sign_holder,
    holder_precommit,
    issue,
    issue_multi_issuer,
    issue_versions,
    open_precommitted,
    validate,
)
from .formats import CredentialFormat, FieldSpec
from .presentation import CredentialRequest, DisclosureRequest, Presentation, VerificationReport
from .registry import Registry, RegistryView

__version__ = "0.1.0"

__all__ = [
    "Credential",
    "CredentialBatch",
    "CredentialFormat",
    "CredentialRequest",
    "DisclosureRequest",
    "FieldSpec",
    "IssuanceRecord",
    "PossessionProof",
    "Presentation",
    "PrivateKey",
    "PublicKey",
    "Registry",
    "RegistryView",
    "Signature",
    "VerificationReport",
    "co_sign_holder",
    "holder_precommit",
    "issue",
    "issue_multi_issuer",
    "issue_versions",
    "keygen",
    "open_precommitted",
    "validate",
]
