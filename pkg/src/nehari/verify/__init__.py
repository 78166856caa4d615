# src/nehari/verify/__init__.py
from nehari.verify.certificate import (
    Certificate,
    CertificateItem,
    certify,
    nehari_margins,
    pair_residual,
    weak_residual,
)
from nehari.verify.sampling import (
    SamplingConfig,
    embedding_sampling,
    holder_sampling,
    nehari_sampling,
    perturbation_check,
)

__all__ = [
    "Certificate",
    "CertificateItem",
    "certify",
    "nehari_margins",
    "pair_residual",
    "weak_residual",
    "SamplingConfig",
    "nehari_sampling",
    "embedding_sampling",
    "holder_sampling",
    "perturbation_check",
]
