"""Auditable cross-chain privacy: anonymous identities, threshold-escrowed
identity capsules and auditor-only linkability."""

__version__ = "0.1.0"
