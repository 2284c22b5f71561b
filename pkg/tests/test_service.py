import pytest
from fastapi.testclient import TestClient

from regosense.campaign.service import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "store")
    with TestClient(app) as c:
        yield c


def make_session(client, seed=7, candidates=101):
    r = client.post("/sessions", json={
        "terrain": "white_sands_transect",
        "hypothesis": {"shape": "monotone_increasing",
                       "description": "strength rises downwind"},
        "seed": seed,
        "candidate_count": candidates,
    })
    assert r.status_code == 201
    return r.json()["id"]


def plan_20(client, sid):
    locs = [i * 55.0 / 19 for i in range(20)]
    r = client.post(f"/sessions/{sid}/plan",
                    json={"locations_m": locs, "gait": "crawl"})
    assert r.status_code == 200
    return r.json()


class TestSessionEndpoints:
    def test_create_and_fetch(self, client):
        sid = make_session(client)
        r = client.get(f"/sessions/{sid}")
        assert r.status_code == 200
        state = r.json()
        assert state["status"] == "open"
        assert state["length_m"] == 55.0
        assert state["measurements"] == []

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_plan_populates_measurements(self, client):
        sid = make_session(client)
        out = plan_20(client, sid)
        assert len(out["measurement_ids"]) == 20
        state = client.get(f"/sessions/{sid}").json()
        assert len(state["measurements"]) == 20
        assert all(m["valid"] for m in state["measurements"])

    def test_out_of_bounds_plan_422(self, client):
        sid = make_session(client)
        r = client.post(f"/sessions/{sid}/plan", json={"locations_m": [60.0]})
        assert r.status_code == 422
        assert client.get(f"/sessions/{sid}").json()["measurements"] == []

    def test_suggestions_round(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        r = client.get(f"/sessions/{sid}/suggestions?k=3")
        assert r.status_code == 200
        body = r.json()
        assert body["round"] == 1
        assert len(body["suggestions"]) == 3
        locs = [s["location"] for s in body["suggestions"]]
        assert len(set(locs)) == 3
        # idempotent while the round is open
        again = client.get(f"/sessions/{sid}/suggestions?k=3").json()
        assert again == body

    def test_decision_flow_and_stale_409(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        top = client.get(f"/sessions/{sid}/suggestions?k=3").json()["suggestions"][0]
        r = client.post(f"/sessions/{sid}/decision", json={
            "round": 1, "location": top["location"], "outcome": "accept",
        })
        assert r.status_code == 200
        assert len(r.json()["measurement_ids"]) == 1
        state = client.get(f"/sessions/{sid}").json()
        assert len(state["measurements"]) == 21
        # the same round is now closed
        r = client.post(f"/sessions/{sid}/decision", json={
            "round": 1, "location": top["location"], "outcome": "accept",
        })
        assert r.status_code == 409

    def test_reject_with_alternative(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        top = client.get(f"/sessions/{sid}/suggestions?k=3").json()["suggestions"][0]
        r = client.post(f"/sessions/{sid}/decision", json={
            "round": 1, "location": top["location"], "outcome": "reject_alt",
            "alternative": 0.42,
        })
        assert r.status_code == 200
        state = r.json()["state"]
        assert state["measurements"][-1]["location"] == pytest.approx(0.42)

    def test_objective_feedback_reduces_weight(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        first = client.get(f"/sessions/{sid}/suggestions?k=3").json()
        r = client.post(f"/sessions/{sid}/decision", json={
            "round": 1, "location": first["suggestions"][0]["location"],
            "outcome": "reject", "feedback": "objective",
            "stated_objective": "verify",
        })
        assert r.status_code == 200
        second = client.get(f"/sessions/{sid}/suggestions?k=3").json()
        assert second["round"] == 2
        assert second["weight"] <= 0.5 * first["weight"] + 1e-9

    def test_curves_endpoint(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        state = client.get(f"/sessions/{sid}").json()
        mid = state["measurements"][0]["curve_id"]
        r = client.get(f"/sessions/{sid}/curves/{mid}")
        assert r.status_code == 200
        body = r.json()
        assert len(body["depth_m"]) == len(body["force_N"]) > 100
        assert body["regime"] in ("linear", "plateau", "brittle",
                                  "crust_then_linear")
        assert 0.0 <= body["confidence"] <= 1.0
        assert isinstance(body["ruptures"], list)
        assert client.get(f"/sessions/{sid}/curves/m9999").status_code == 404

    def test_crusted_curve_reports_rupture(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        state = client.get(f"/sessions/{sid}").json()
        # location 15 of 20 sits at 33.4 m, deep in the crusted interdune
        mid = state["measurements"][12]["curve_id"]
        body = client.get(f"/sessions/{sid}/curves/{mid}").json()
        assert body["regime"] == "crust_then_linear"
        assert len(body["ruptures"]) == 1

    def test_belief_endpoint(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        r = client.get(f"/sessions/{sid}/belief")
        assert r.status_code == 200
        body = r.json()
        assert len(body["candidates"]) == len(body["mean"]) == 101
        assert len(body["hypothesis_template"]) == 101
        assert all(u >= 0 for u in body["uncertainty"])

    def test_belief_without_measurements_422(self, client):
        sid = make_session(client)
        assert client.get(f"/sessions/{sid}/belief").status_code == 422

    def test_conclude_blocks_further_writes(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        assert client.post(f"/sessions/{sid}/conclude").status_code == 200
        r = client.post(f"/sessions/{sid}/plan", json={"locations_m": [1.0]})
        assert r.status_code == 422
        assert client.get(f"/sessions/{sid}/suggestions?k=3").status_code == 422

    def test_validation_bad_outcome(self, client):
        sid = make_session(client)
        plan_20(client, sid)
        client.get(f"/sessions/{sid}/suggestions?k=1")
        r = client.post(f"/sessions/{sid}/decision", json={
            "round": 1, "location": 0.5, "outcome": "maybe"})
        assert r.status_code == 422

    def test_state_survives_restart(self, client, tmp_path):
        sid = make_session(client)
        plan_20(client, sid)
        state = client.get(f"/sessions/{sid}").json()
        fresh = TestClient(create_app(tmp_path / "store"))
        assert fresh.get(f"/sessions/{sid}").json() == state
