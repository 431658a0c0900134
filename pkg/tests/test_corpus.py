import json

from rentmatch.corpus import DEFAULT_CORPUS, build_corpus, load_instances, load_traces


def test_shipped_corpus_matches_generator():
    for kind, cases in build_corpus().items():
        shipped = sorted((DEFAULT_CORPUS / kind).glob("*.json"))
        assert [p.stem for p in shipped] == sorted(c.name for c in cases)
        by_name = {c.name: c for c in cases}
        for p in shipped:
            assert json.loads(p.read_text()) == by_name[p.stem].to_dict()


def test_corpus_shape():
    short = load_traces()
    assert len(short) >= 20
    assert all(c.randomized_rounds <= 10 for c in short)
    assert {c.d for c in short} == {1, 2, 3, 5}
    assert any(c.queries == [(0, 1), (0, 1)] and c.d == 2 for c in short)
    long = load_traces(kind="long_traces")
    assert len(long) >= 20 and all(len(c.queries) <= 30 for c in long)
    rand = [c.instance for c in load_instances() if c.name.startswith("random-")]
    assert len(rand) == 50
    assert all(i.num_offline <= 6 and i.num_online <= 20 and i.duration <= 4 for i in rand)
