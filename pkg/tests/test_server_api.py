import json
import shutil
import threading
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from flowd.server.app import ApiConfig, create_app

from oracles import REQUEST_TOP_KEYS, alternation_violations

BOOTH_ENTRIES = [{"booth_number": 1}, {"booth_cardinalPoint": "North"}]


@pytest.fixture()
def client(potluck_copy, tmp_path):
    app = create_app(ApiConfig(repository_root=potluck_copy, data_dir=tmp_path / "data"))
    with TestClient(app) as c:
        yield c


def launch(client, launcher_id="select_booth"):
    response = client.post(f"/apps/potluck/launchers/{launcher_id}/launch")
    assert response.status_code == 200, response.text
    return response.json()


# --- app summary -----------------------------------------------------------

def test_app_summary_hides_flow_internals(client):
    body = client.get("/apps/potluck").json()
    assert body["appId"] == "potluck"
    assert body["name"] == "Potluck"
    assert body["version"] == 1
    assert [l["id"] for l in body["launchers"]] == [
        "sign_up", "select_booth", "show_info", "review",
    ]
    for launcher in body["launchers"]:
        assert set(launcher) <= {"id", "label", "icon"}


def test_unknown_app_is_404(client):
    response = client.get("/apps/nothing")
    assert response.status_code == 404
    assert response.json()["error"] == "UnknownApp"


# --- launch and respond ----------------------------------------------------

def test_launch_returns_listing_request(client):
    body = launch(client)
    assert body["status"] == "WaitingForUser"
    request = body["request"]
    assert set(request) == REQUEST_TOP_KEYS
    assert request["instanceId"] == body["instanceId"]
    assert request["gatherElements"][0]["name"] == "booth_number"
    assert request["constraints"] == [
        {"name": "booth_cardinalPoint", "valueFrom": "cpoints"}
    ]
    assert request["value"] == [{"cpoints": ["North", "South", "East", "West"]}]


def test_launch_unknown_launcher(client):
    response = client.post("/apps/potluck/launchers/ghost/launch")
    assert response.status_code == 404
    assert response.json()["error"] == "UnknownLauncher"


def test_respond_finalizes(client):
    body = launch(client)
    iid = body["instanceId"]
    response = client.post(
        f"/instances/{iid}/response",
        json={"instanceId": iid, "response": BOOTH_ENTRIES},
    )
    assert response.status_code == 200
    assert response.json() == {"status": "Finalized"}

    summary = client.get(f"/instances/{iid}").json()
    assert summary["state"] == "Finalized"
    assert summary["flowName"] == "select_booth"
    assert summary["launcherId"] == "select_booth"
    assert summary["modelVersion"] == 1
    assert summary["startedAt"]


def test_respond_without_body_instance_id_uses_the_path(client):
    iid = launch(client)["instanceId"]
    response = client.post(
        f"/instances/{iid}/response", json={"response": BOOTH_ENTRIES}
    )
    assert response.status_code == 200
    assert response.json()["status"] == "Finalized"


def test_respond_with_mismatched_instance_id_is_stale(client):
    iid = launch(client)["instanceId"]
    response = client.post(
        f"/instances/{iid}/response",
        json={"instanceId": iid + 5, "response": BOOTH_ENTRIES},
    )
    assert response.status_code == 409
    assert response.json()["error"] == "StaleInstance"


def test_respond_to_unknown_instance(client):
    response = client.post("/instances/404/response", json={"response": []})
    assert response.status_code == 404
    assert response.json()["error"] == "UnknownInstance"


def test_intermediate_request_is_returned_by_respond(client):
    # A multi-round flow answers with the next request instead of a status.
    body = launch(client)
    iid = body["instanceId"]
    reject = client.post(
        f"/instances/{iid}/response",
        json={"response": [{"booth_number": 2}, {"booth_cardinalPoint": "Up"}]},
    )
    assert reject.status_code == 422
    ok = client.post(
        f"/instances/{iid}/response",
        json={"response": BOOTH_ENTRIES},
    )
    assert "request" not in ok.json()


def test_constraint_rejection_keeps_the_request_outstanding(client):
    body = launch(client)
    iid = body["instanceId"]
    original = body["request"]

    reject = client.post(
        f"/instances/{iid}/response",
        json={"instanceId": iid, "response": [{"booth_number": 1}, {"booth_cardinalPoint": "Up"}]},
    )
    assert reject.status_code == 422
    assert reject.json()["error"] == "ConstraintViolation"

    assert client.get(f"/instances/{iid}").json()["state"] == "WaitingForUser"
    entries = client.get(f"/instances/{iid}/log").json()
    outstanding = [e for e in entries if e["direction"] == "EngineToClient"][-1]
    assert outstanding["payload"] == original
    assert [e for e in entries if e["direction"] == "ClientToEngine"] == []

    accept = client.post(
        f"/instances/{iid}/response", json={"instanceId": iid, "response": BOOTH_ENTRIES}
    )
    assert accept.json()["status"] == "Finalized"


def test_malformed_bodies_are_schema_errors(client):
    iid = launch(client)["instanceId"]
    no_array = client.post(f"/instances/{iid}/response", json={"instanceId": iid})
    assert no_array.status_code == 422
    assert no_array.json()["error"] == "SchemaError"
    extra = client.post(
        f"/instances/{iid}/response",
        json={"response": BOOTH_ENTRIES, "noise": 1},
    )
    assert extra.status_code == 422
    assert extra.json()["error"] == "SchemaError"


# --- instance queries ------------------------------------------------------

def test_list_instances_with_filter(client):
    first = launch(client)["instanceId"]
    second = launch(client, "sign_up")["instanceId"]
    listed = client.get("/instances", params={"appId": "potluck"}).json()
    assert [i["instanceId"] for i in listed] == [first, second]
    assert client.get("/instances", params={"appId": "nothing"}).json() == []
    everything = client.get("/instances").json()
    assert len(everything) == 2


def test_log_endpoint_orders_and_alternates(client):
    iid = launch(client)["instanceId"]
    client.post(f"/instances/{iid}/response", json={"response": BOOTH_ENTRIES})
    entries = client.get(f"/instances/{iid}/log").json()
    assert [e["seq"] for e in entries] == list(range(len(entries)))
    assert alternation_violations(entries) == []
    directions = [e["direction"] for e in entries]
    assert directions[0] == "Internal"
    assert "EngineToClient" in directions and "ClientToEngine" in directions
    assert entries[-1]["payload"] == {"event": "Finalized"}


def test_cancel_endpoint(client):
    iid = launch(client)["instanceId"]
    assert client.post(f"/instances/{iid}/cancel").json() == {"status": "Cancelled"}
    again = client.post(f"/instances/{iid}/cancel")
    assert again.status_code == 409
    assert again.json()["error"] == "AlreadyTerminal"
    stale = client.post(f"/instances/{iid}/response", json={"response": BOOTH_ENTRIES})
    assert stale.status_code == 409
    assert stale.json()["error"] == "StaleInstance"


# --- hot update ------------------------------------------------------------

def _survey_doc(potluck_copy, version=2):
    doc = json.loads((potluck_copy / "apps" / "potluck.app.json").read_text())
    doc["version"] = version
    doc["launchers"].append(
        {
            "id": "survey",
            "label": "Survey",
            "flow": "review",
            "initialValues": {"rating_score": 3},
        }
    )
    return doc


def test_put_activates_a_new_version(client, potluck_copy):
    running = launch(client)["instanceId"]

    response = client.put("/apps/potluck", json=_survey_doc(potluck_copy))
    assert response.status_code == 200
    assert response.json() == {"version": 2}

    summary = client.get("/apps/potluck").json()
    assert summary["version"] == 2
    assert [l["id"] for l in summary["launchers"]][-1] == "survey"

    # The repository file was rewritten in place.
    on_disk = json.loads((potluck_copy / "apps" / "potluck.app.json").read_text())
    assert on_disk["version"] == 2

    # Old instances stay pinned to the version they launched with.
    assert client.get(f"/instances/{running}").json()["modelVersion"] == 1
    done = client.post(
        f"/instances/{running}/response", json={"response": BOOTH_ENTRIES}
    )
    assert done.json()["status"] == "Finalized"

    # The new launcher starts at version 2 with its default prefilled.
    body = launch(client, "survey")
    assert body["request"]["value"] == [{"rating_score": 3}]
    summary = client.get(f"/instances/{body['instanceId']}").json()
    assert summary["modelVersion"] == 2


def test_put_requires_the_next_version(client, potluck_copy):
    doc = _survey_doc(potluck_copy)
    assert client.put("/apps/potluck", json=doc).status_code == 200
    again = client.put("/apps/potluck", json=doc)
    assert again.status_code == 409
    assert again.json()["error"] == "VersionConflict"
    assert "expected version 3" in again.json()["detail"]


def test_put_validation_failures_are_422(client, potluck_copy):
    doc = _survey_doc(potluck_copy)
    doc["launchers"][-1]["flow"] = "ghost_flow"
    response = client.put("/apps/potluck", json=doc)
    assert response.status_code == 422
    assert response.json()["error"] == "UnknownFlow"

    wrong_id = _survey_doc(potluck_copy)
    wrong_id["appId"] = "other"
    response = client.put("/apps/potluck", json=wrong_id)
    assert response.status_code == 422
    assert response.json()["error"] == "SchemaError"

    response = client.put("/apps/potluck", json=[1, 2])
    assert response.status_code == 422

    # A failed update leaves the active version untouched.
    assert client.get("/apps/potluck").json()["version"] == 1


def test_put_picks_up_new_flow_files(client, potluck_copy, welcome_root):
    for sub in ("domains", "flows"):
        for path in (welcome_root / sub).iterdir():
            shutil.copyfile(path, potluck_copy / sub / path.name)

    doc = json.loads((potluck_copy / "apps" / "potluck.app.json").read_text())
    doc["version"] = 2
    doc["launchers"].append(
        {
            "id": "welcome",
            "label": "Welcome",
            "flow": "welcome",
            "initialValues": {
                "welcome_text": "Welcome to the potluck!",
                "welcome_image": "https://example.org/potluck.jpg",
            },
        }
    )
    assert client.put("/apps/potluck", json=doc).status_code == 200

    body = launch(client, "welcome")
    request = body["request"]
    assert request["gatherElements"] == []
    assert request["displayElements"] == [
        {
            "name": "welcome_text",
            "label": "Message:",
            "type": "String",
            "value": "Welcome to the potluck!",
        },
        {
            "name": "welcome_image",
            "label": "Photo:",
            "type": "String",
            "value": "https://example.org/potluck.jpg",
            "render": "image",
        },
    ]
    done = client.post(
        f"/instances/{body['instanceId']}/response", json={"response": []}
    )
    assert done.json()["status"] == "Finalized"


# --- version long-poll -----------------------------------------------------

def test_version_poll_returns_immediately_when_newer(client):
    assert client.get("/apps/potluck/version", params={"since": 0}).json() == {"version": 1}


def test_version_poll_times_out_at_the_requested_bound(client):
    started = time.monotonic()
    body = client.get(
        "/apps/potluck/version", params={"since": 1, "timeoutMs": 300}
    ).json()
    elapsed = time.monotonic() - started
    assert body == {"version": 1}
    assert 0.25 <= elapsed < 5


def test_version_poll_wakes_on_update(client, potluck_copy):
    results = {}

    def poll():
        results["body"] = client.get(
            "/apps/potluck/version", params={"since": 1, "timeoutMs": 10000}
        ).json()

    poller = threading.Thread(target=poll)
    poller.start()
    time.sleep(0.3)
    assert client.put("/apps/potluck", json=_survey_doc(potluck_copy)).status_code == 200
    poller.join(timeout=5)
    assert not poller.is_alive()
    assert results["body"] == {"version": 2}


def test_version_poll_unknown_app(client):
    assert client.get("/apps/nothing/version").status_code == 404


# --- web client bundle -----------------------------------------------------

DIST = Path(__file__).resolve().parents[1] / "frontend" / "dist"


def test_ui_serves_an_explicit_bundle_dir(potluck_copy, tmp_path):
    bundle = tmp_path / "bundle"
    (bundle / "assets").mkdir(parents=True)
    (bundle / "index.html").write_text("<!doctype html><div id=app></div>", encoding="utf-8")
    (bundle / "assets" / "main.js").write_text("console.log('hi')", encoding="utf-8")
    app = create_app(ApiConfig(
        repository_root=potluck_copy, data_dir=tmp_path / "data", ui_dir=bundle,
    ))
    with TestClient(app) as c:
        index = c.get("/ui/")
        assert index.status_code == 200
        assert "id=app" in index.text
        assert c.get("/ui/assets/main.js").status_code == 200
        assert c.get("/ui/assets/other.js").status_code == 404


@pytest.mark.skipif(not DIST.is_dir(), reason="frontend not built")
def test_ui_serves_the_built_frontend(client):
    index = client.get("/ui/")
    assert index.status_code == 200
    assert 'id="app"' in index.text
    for asset in (DIST / "assets").iterdir():
        assert client.get(f"/ui/assets/{asset.name}").status_code == 200
