"""Smoke tests for the Python bindings.

These exercise each bound operation end to end on tiny inputs; behavioral
depth lives in the C++ test suites.
"""

import json
import os

import pytest

try:
    import _formnav as fn
except ImportError:  # installed as a wheel
    import formnav as fn

SIMPLE_FORM = (
    "<html><head><title>Apply</title></head><body><form id=f>"
    "<input name=email type=email required>"
    "<input type=checkbox id=news name=news>"
    "</form></body></html>"
)


@pytest.fixture
def bundle(tmp_path):
    d = str(tmp_path / "bundle")
    url = fn.save_single_form_bundle(d, SIMPLE_FORM)
    return d, url


def test_benchmark_generation(tmp_path):
    out = str(tmp_path / "bench")
    fn.generate_benchmark(out, simple=3, dynamic=3, seed=42)
    index = json.loads(open(os.path.join(out, "index.json")).read())
    assert len(index["forms"]) == 6
    pool = json.loads(open(os.path.join(out, "pool.json")).read())
    assert len(pool["entries"]) == 200


def test_crawl_and_scenario(bundle):
    d, url = bundle
    graph = fn.crawl(d, url)
    nodes = json.loads(graph)["nodes"]
    assert len(nodes) == 1
    scenario = json.loads(fn.generate_scenario(graph, url, url))
    assert scenario["trivially_satisfied"]
    assert "navigation" in fn.scenario_markdown(json.dumps(scenario)).lower()


def test_explore_plan_run_evaluate(bundle):
    d, url = bundle
    states = fn.explore_form(d, url, "id=f")
    assert len(json.loads(states)["states"]) == 1

    scripts = fn.plan_scripts(states)
    assert len(scripts) == 1
    ops = [c["op"] for c in json.loads(scripts[0])["commands"]]
    assert ops[0] == "navigate" and ops[-1] == "assert_no_validation_error"

    results = fn.run_scripts(d, scripts)
    records = json.loads(results)["cases"][0]["records"]
    assert records and all(r["success"] for r in records)

    report = json.loads(fn.compute_metrics(results))
    assert report["micro_accuracy"] == 1.0
    assert report["n_interactions"] == len(records)


def test_pipeline(bundle, tmp_path):
    d, url = bundle
    config = {
        "version": 1,
        "backend": "simulator",
        "bundle_dir": d,
        "start_url": url,
        "out_dir": str(tmp_path / "run"),
    }
    summary = json.loads(fn.run_pipeline(json.dumps(config)))
    assert summary["findings"] == 0
    assert summary["report"]["micro_accuracy"] == 1.0
    assert os.path.exists(os.path.join(summary["run_dir"], "report.json"))


def test_judge_offline():
    rubric = os.path.join(os.path.dirname(__file__), "..", "..", "rubric",
                          "v1.json")
    score = json.loads(
        fn.judge_offline(
            {
                "completeness": 7.63,
                "accuracy_of_expected": 8.46,
                "user_experience": 7.61,
                "robustness": 5.61,
                "clarity_organization": 8.70,
            },
            rubric,
        )
    )
    assert score["final_rendered"] == "7.60"
