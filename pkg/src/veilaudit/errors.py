"""Exception hierarchy. Verification failures that are ordinary outcomes
(a proof that does not verify) are returned as ``False``; these are raised
for violated preconditions and rejected state transitions."""


class VeilAuditError(Exception):
    """Base class for all errors raised by this package."""


class MalformedEncoding(VeilAuditError, ValueError):
    pass


class EmptySalt(VeilAuditError, ValueError):
    pass


class ZeroKey(VeilAuditError, ValueError):
    pass


class AddressMismatch(VeilAuditError, ValueError):
    pass


class WitnessInconsistent(VeilAuditError, ValueError):
    pass


class ZeroRandomness(VeilAuditError, ValueError):
    pass


# threshold escrow
class BadThreshold(VeilAuditError, ValueError):
    pass


class InvalidShare(VeilAuditError):
    pass


class BelowThreshold(VeilAuditError):
    pass


class BadShareProof(VeilAuditError):
    pass


class DuplicateIndex(VeilAuditError):
    pass


# chain simulation
class UnknownChain(VeilAuditError, KeyError):
    pass


class InsufficientAttestations(VeilAuditError):
    pass


class NotYetFinal(VeilAuditError):
    """Source transaction lacks the required confirmations (retriable)."""


class DuplicateMessage(VeilAuditError):
    pass


class InsufficientFunds(VeilAuditError):
    pass


class UnknownDeposit(VeilAuditError, KeyError):
    pass


class ProofRejected(VeilAuditError):
    pass


class AlreadyReleased(VeilAuditError):
    pass


class LedgerRejection(VeilAuditError):
    """Base for ``ledger_append`` rejections; the ledger is left unchanged."""


class DuplicateKey(LedgerRejection):
    pass


class DuplicateNullifier(LedgerRejection):
    pass


class BadExecAttestation(LedgerRejection):
    pass


class BadLinkProof(LedgerRejection):
    pass


class UnknownTag(VeilAuditError, KeyError):
    pass


# auditor / bench
class BadRate(VeilAuditError, ValueError):
    pass


class DomainMismatch(VeilAuditError, ValueError):
    pass


class BadConfig(VeilAuditError, ValueError):
    pass


class EmptySamples(VeilAuditError, ValueError):
    pass
