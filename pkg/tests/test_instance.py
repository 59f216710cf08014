import copy
import json

import pytest

from ctopsp.instance import (
    ParseError,
    ValidationError,
    derive_paths,
    derive_time_windows,
    dump_instance,
    instance_to_doc,
    load_instance,
    validate_instance,
)


def _doc(inst):
    return json.loads(dump_instance(inst))


def test_round_trip_is_stable(t1):
    text = dump_instance(t1)
    again = load_instance(text)
    assert again == t1
    assert dump_instance(again) == text


def test_windows_t1(t1):
    w = derive_time_windows(t1)
    # airport window [Dep, Dep+G], first PCA widened by one air cap
    f0 = t1.flights[0].options[0]
    g, a = t1.caps.ground, t1.caps.air
    assert (w[(0, 0, f0.omega[0])].lo, w[(0, 0, f0.omega[0])].hi) == (0, g)
    assert w[(0, 0, f0.omega[1])].hi == f0.crossings[1] + g + a


def test_paths_grouped_by_sequence(t1):
    paths, of = derive_paths(t1)
    assert len(of) == t1.n_options
    for (i, j), p in of.items():
        assert paths[p].pcas == t1.flights[i].options[j].omega[1:]


def test_missing_key_is_parse_error(t1):
    doc = _doc(t1)
    del doc["caps"]
    with pytest.raises(ParseError):
        load_instance(json.dumps(doc))


def test_bad_json():
    with pytest.raises(ParseError):
        load_instance("{not json")


def test_unknown_key_rejected(t1):
    doc = _doc(t1)
    doc["extra"] = 1
    with pytest.raises(ParseError):
        load_instance(json.dumps(doc))


@pytest.mark.parametrize("mutate", [
    lambda d: d["costs"].update(ca=0.5),
    lambda d: d.update(horizon=2),
    lambda d: d["flights"].append(copy.deepcopy(d["flights"][0])),
    lambda d: d["scenarios"].update(probabilities=[0.7, 0.7]),
    lambda d: d["flights"][0].update(options=[]),
])
def test_invalid_documents(t1, mutate):
    doc = _doc(t1)
    mutate(doc)
    with pytest.raises(ValidationError):
        load_instance(json.dumps(doc))


def test_valid_instance_has_no_problems(t1, corpus):
    assert validate_instance(t1) == []
    for inst in corpus:
        assert validate_instance(inst) == []


def test_to_doc_matches_dump(t1):
    assert instance_to_doc(t1) == _doc(t1)
