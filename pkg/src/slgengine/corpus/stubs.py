"""Deterministic stub implementations for the corpus activities.

External services (payment providers, plagiarism checker, publisher upload)
are environmental, so every stub is a pure function of the fixture data and
its call inputs.  Nothing here mutates fixtures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..model import DomainType
from ..registry import ActivityCall, ActivityRegistry
from ..runtime import DomainValue, PrimValue, ServiceInstance, Value

DATA_DIR = Path(__file__).parent / "data"


class Fixtures:
    """Named scenario data: papers, authors, payments, uploaded artifacts."""

    def __init__(self, data: dict):
        self.data = data

    @classmethod
    def from_file(cls, path: str | Path) -> "Fixtures":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    @property
    def users(self) -> list[dict]:
        return self.data.get("users", [])

    @property
    def papers(self) -> list[dict]:
        return self.data.get("papers", [])

    @property
    def payments(self) -> list[dict]:
        return self.data.get("payments", [])

    @property
    def bookings(self) -> list[dict]:
        return self.data.get("bookings", [])

    def artifact(self, name: str) -> bool:
        return bool(self.data.get("artifacts", {}).get(name, False))

    @property
    def default_payment_service(self) -> str | None:
        return self.data.get("defaultPaymentService")

    @property
    def default_validation_process(self) -> str | None:
        return self.data.get("defaultValidationProcess")

    @property
    def payment_declined(self) -> bool:
        return bool(self.data.get("paymentDeclined", False))

    # -- derived checks ------------------------------------------------------

    def paid_authors(self) -> set[str]:
        return {p["author"] for p in self.payments if p.get("paid")}

    def registered_users(self) -> set[str]:
        return {u["name"] for u in self.users if u.get("registered")}

    def booked_authors(self, what: str) -> set[str]:
        return {b["author"] for b in self.bookings if b.get(what)}

    def every_paper_has_author_in(self, names: set[str]) -> bool:
        return all(any(a in names for a in paper.get("authors", [])) for paper in self.papers)


def default_fixtures() -> Fixtures:
    return Fixtures.from_file(DATA_DIR / "default-fixtures.json")


@dataclass
class StubRecorder:
    """Collects what the publisher-upload stub was asked to ship."""

    sent: list[str] = field(default_factory=list)


def user_value(fixtures: Fixtures, name: str | None = None) -> DomainValue:
    users = fixtures.users
    chosen = name if name is not None else (users[0]["name"] if users else "guest")
    return DomainValue(DomainType("User"), {"name": PrimValue(chosen)})


def proceedings_value(fixtures: Fixtures) -> DomainValue:
    titles = ", ".join(p["title"] for p in fixtures.papers)
    return DomainValue(DomainType("Proceedings"), {"papers": PrimValue(titles)})


def _attendee(value: Value) -> str:
    if isinstance(value, DomainValue):
        inner = value.payload.get("attendee") or value.payload.get("name")
        if isinstance(inner, PrimValue) and isinstance(inner.value, str):
            return inner.value
    return "guest"


def register_stub_activities(
    registry: ActivityRegistry, fixtures: Fixtures, recorder: StubRecorder | None = None
) -> None:
    f = fixtures
    rec = recorder or StubRecorder()

    def yes_no(flag: bool) -> tuple[str, list[Value]]:
        return ("yes", []) if flag else ("no", [])

    def fill_registration_info(call: ActivityCall):
        return "done", [
            DomainValue(DomainType("RegistrationInfo"), {"attendee": PrimValue(_attendee(call.inputs[0]))})
        ]

    def get_payment_process(call: ActivityCall):
        gid = f.default_payment_service
        if gid:
            return "preset", [call.engine.instantiate(gid)]
        return "none", []

    def get_process(call: ActivityCall):
        gid = f.default_validation_process
        if gid:
            return "found", [call.engine.instantiate(gid)]
        return "none", []

    def get_credit_card_provider(call: ActivityCall):
        return "ok", [ServiceInstance(DomainType("CreditCardProvider"))]

    def get_invoice_provider(call: ActivityCall):
        return "ok", [ServiceInstance(DomainType("InvoiceProvider"))]

    def charge_credit_card(call: ActivityCall):
        if f.payment_declined:
            return "declined", []
        return "ok", [PrimValue(f"cc-receipt-{_attendee(call.inputs[0])}")]

    def charge_invoice(call: ActivityCall):
        if f.payment_declined:
            return "declined", []
        return "ok", [PrimValue(f"invoice-{_attendee(call.inputs[0])}")]

    def prepare_proceedings(call: ActivityCall):
        return "success", []

    def send_to_springer(call: ActivityCall):
        rec.sent.append(_attendee(call.inputs[0]))
        return "sent", []

    def topical_parts(call: ActivityCall):
        return yes_no(all(p.get("inTopicalPart") for p in f.papers))

    def iterate_papers(call: ActivityCall):
        return ("next", []) if f.papers else ("done", [])

    def registered(call: ActivityCall):
        return yes_no(f.every_paper_has_author_in(f.registered_users()))

    def author_paid(call: ActivityCall):
        return yes_no(f.every_paper_has_author_in(f.paid_authors()))

    def flight_booked(call: ActivityCall):
        return yes_no(f.every_paper_has_author_in(f.booked_authors("flight")))

    def hotel_booked(call: ActivityCall):
        return yes_no(f.every_paper_has_author_in(f.booked_authors("hotel")))

    def final_version(call: ActivityCall):
        if f.artifact("finalVersionUploaded"):
            return "yes", [PrimValue(True)]
        return "no", []

    def source_archive(call: ActivityCall):
        if f.artifact("sourceArchiveUploaded"):
            return "yes", [PrimValue(True)]
        return "no", []

    def compiles(call: ActivityCall):
        if f.artifact("sourcesCompile"):
            return "yes", [PrimValue(True)]
        return "no", []

    def margins(call: ActivityCall):
        return yes_no(f.artifact("marginsOk"))

    def not_a_plagiarism(call: ActivityCall):
        return yes_no(not f.artifact("plagiarism"))

    def copyright_form(call: ActivityCall):
        return yes_no(f.artifact("copyrightFormUploaded"))

    registry.register("fill-registration-info", fill_registration_info)
    registry.register("get-payment-process", get_payment_process)
    registry.register("get-process", get_process)
    registry.register("get-credit-card-provider", get_credit_card_provider)
    registry.register("get-invoice-provider", get_invoice_provider)
    registry.register("payment-service-call", charge_credit_card, domain="CreditCardProvider")
    registry.register("payment-service-call", charge_invoice, domain="InvoiceProvider")
    registry.register("prepare-proceedings", prepare_proceedings)
    registry.register("send-to-springer", send_to_springer)
    registry.register("all-papers-in-topical-parts?", topical_parts)
    registry.register("iterate-papers-in-proceedings", iterate_papers)
    registry.register("registered?", registered)
    registry.register("did-at-least-one-author-pay?", author_paid)
    registry.register("flight-booked?", flight_booked)
    registry.register("hotel-booked?", hotel_booked)
    registry.register("final-version?", final_version)
    registry.register("source-archive?", source_archive)
    registry.register("compiles?", compiles)
    registry.register("margins?", margins)
    registry.register("not-a-plagiarism?", not_a_plagiarism)
    registry.register("copyright-form?", copyright_form)
