"""FastAPI service wrapping the decision engine.

Models and facts travel as source text in request bodies; the service is
stateless, so it scales to many clients and doubles as the in-process
backend of the command-line client.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..decisions import UtilityError, load_utility, optimal_decision, parse_criterion
from ..dsl import Model, ParseError, parse_facts, parse_model
from ..kernel import (
    EnumerationCapExceeded,
    Vocabulary,
    VocabularyError,
    build_vocabulary,
)
from ..oel import render_sequence
from ..queries import enumerate_decision_map, explain, minimal_knowledge
from ..tables import (
    DecisionResult,
    FactSet,
    TableError,
    VALUE,
    check_table,
    decide,
    decide_drd,
    facts_to_state,
    to_theory_sequence,
)
from . import schemas as sc

ENGINE_ERRORS = (ParseError, TableError, VocabularyError, UtilityError, EnumerationCapExceeded)


def _outcome(variable: str, r: DecisionResult) -> sc.DecisionOutcome:
    return sc.DecisionOutcome(
        variable=variable,
        status=r.status,
        decision=str(r.value) if r.status == VALUE else None,
        candidates=sorted(map(str, r.values)) if r.status != VALUE else [],
        firedRows=list(r.fired_rows),
        stateSize=r.state_size,
        note=r.note,
    )


def _parse(req: sc.FactsRequest) -> tuple[Model, FactSet]:
    model = parse_model(req.model)
    facts = model.facts or FactSet(())
    inline = getattr(req, "facts", "")
    if inline:
        extra = parse_facts(inline, model.vocabulary)
        for var, values in extra.as_dict().items():
            facts = facts.restrict(var, values)
    return model, facts


def _aggregate(statuses: list[str]) -> str:
    for bad in ("inconsistent", "hit_policy_violation", "undefined"):
        if bad in statuses:
            return bad
    return VALUE


def create_app() -> FastAPI:
    app = FastAPI(title="epistemic decision service", version=__version__)

    @app.exception_handler(ParseError)
    async def parse_error(_: Request, exc: ParseError):
        detail = sc.ErrorDetail(message=exc.message, line=exc.line, col=exc.col)
        return JSONResponse(status_code=422, content={"error": detail.model_dump()})

    @app.exception_handler(TableError)
    @app.exception_handler(VocabularyError)
    @app.exception_handler(UtilityError)
    @app.exception_handler(EnumerationCapExceeded)
    async def engine_error(_: Request, exc: Exception):
        detail = sc.ErrorDetail(message=str(exc))
        return JSONResponse(status_code=422, content={"error": detail.model_dump()})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/decide", response_model=sc.DecideResponse)
    def decide_endpoint(req: sc.DecideRequest) -> sc.DecideResponse:
        model, facts = _parse(req)
        if req.table:
            table = model.drd.table(req.table)
            results = {table.output[0]: decide(table, facts, model.vocabulary)}
        else:
            results = decide_drd(model.drd, facts, model.vocabulary)
        outcomes = [_outcome(var, r) for var, r in results.items()]
        return sc.DecideResponse(status=_aggregate([o.status for o in outcomes]), results=outcomes)

    @app.post("/v1/state", response_model=sc.StateResponse)
    def state_endpoint(req: sc.FactsRequest) -> sc.StateResponse:
        model, facts = _parse(req)
        env_vars = [v for v in model.vocabulary.symbols
                    if not any(t.output[0] == v for t in model.tables)]
        env_vocab = model.vocabulary.restrict(env_vars)
        state = facts_to_state(facts, env_vocab)
        worlds = [{k: str(v) for k, v in w.assignment().items()} for w in state]
        return sc.StateResponse(stateSize=len(state), worlds=worlds)

    @app.post("/v1/check", response_model=sc.CheckResponse)
    def check_endpoint(req: sc.DecideRequest) -> sc.CheckResponse:
        model = parse_model(req.model)
        table = model.table(req.table)
        report = check_table(table, model.vocabulary)
        issues = [
            sc.CheckIssue(
                state={v: sorted(map(str, vals)) for v, vals in facts.as_dict().items()},
                status=r.status,
                candidates=sorted(map(str, r.values)),
                firedRows=list(r.fired_rows),
            )
            for facts, r in report
        ]
        return sc.CheckResponse(table=table.name, complete=not issues, issues=issues)

    @app.post("/v1/compile", response_model=sc.CompileResponse)
    def compile_endpoint(req: sc.ModelRequest) -> sc.CompileResponse:
        model = parse_model(req.model)
        seq = to_theory_sequence(model.drd, model.vocabulary)
        return sc.CompileResponse(theory=render_sequence(seq))

    @app.post("/v1/optimal", response_model=sc.OptimalResponse)
    def optimal_endpoint(req: sc.OptimalRequest) -> sc.OptimalResponse:
        model, facts = _parse(req)
        table = model.table(req.table)
        env_vocab = model.vocabulary.restrict(table.input_variables)
        out_var, out_sort = table.output
        dec_vocab = build_vocabulary([out_sort], [(out_var, "const", out_sort.name)])
        utility = load_utility(req.utility, env_vocab, dec_vocab)
        state = facts_to_state(facts, env_vocab)
        if state.is_empty:
            return sc.OptimalResponse(status="inconsistent", stateSize=0)
        opt = optimal_decision(utility, parse_criterion(req.criterion), state)
        names = sorted(str(d.value(out_var)) for d in opt.decisions)
        if opt.is_tie:
            return sc.OptimalResponse(status="tie", candidates=names, stateSize=len(state))
        return sc.OptimalResponse(status=VALUE, decision=names[0], stateSize=len(state))

    @app.post("/v1/minimal", response_model=sc.MinimalResponse)
    def minimal_endpoint(req: sc.MinimalRequest) -> sc.MinimalResponse:
        model = parse_model(req.model)
        table = model.table(req.table)
        target = req.target if not table.output[1].numeric else int(req.target)
        profiles = minimal_knowledge(table, target, model.vocabulary)
        return sc.MinimalResponse(
            target=req.target,
            profiles=[
                sc.ProfileModel(values={v: sorted(map(str, vals)) for v, vals in p.restrictions})
                for p in profiles
            ],
        )

    @app.post("/v1/explain", response_model=sc.ExplainResponse)
    def explain_endpoint(req: sc.DecideRequest) -> sc.ExplainResponse:
        model, facts = _parse(req)
        table = model.table(req.table)
        result, expl = explain(table, facts, model.vocabulary)

        def rows(statuses):
            return [
                sc.RowStatusModel(
                    row=s.row,
                    cellTruths=list(s.cell_truths),
                    firstFailingCell=s.first_failing_cell,
                )
                for s in statuses
            ]

        return sc.ExplainResponse(
            result=_outcome(table.output[0], result),
            firedRows=rows(expl.fired_rows),
            blockedRows=rows(expl.blocked_rows),
        )

    @app.post("/v1/map", response_model=sc.MapResponse)
    def map_endpoint(req: sc.DecideRequest) -> sc.MapResponse:
        model = parse_model(req.model)
        table = model.table(req.table)
        entries = [
            sc.MapEntry(
                state={v: sorted(map(str, vals)) for v, vals in profile.restrictions},
                status=r.status,
                decision=str(r.value) if r.status == VALUE else None,
            )
            for profile, r in enumerate_decision_map(table, model.vocabulary)
        ]
        return sc.MapResponse(table=table.name, entries=entries)

    return app


app = create_app()
