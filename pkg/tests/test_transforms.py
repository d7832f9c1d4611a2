import json
import random
from pathlib import Path

import pytest

from noteflow.errors import RegistrySchemaError
from noteflow.parser import AtomicCall, ArgValue, parse_statement
from noteflow.transforms import (TransformRegistry, derive_column_map,
                                 derive_statement_map)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def registry():
    return TransformRegistry.load()


def call(func, *args, refs=()):
    return AtomicCall(receiver="df", func_name=func,
                      args=tuple(ArgValue(kind=k, text=t, value=v) for k, t, v in args),
                      column_refs=tuple(refs))


def test_classify_known_funcs(registry):
    assert registry.classify(call("fillna")).name == "fill"
    assert registry.classify(call("replace")).name == "replace"
    assert registry.classify(call("frobnicate")).name == "unknown"


def test_getitem_argument_rules(registry):
    mask = call("getitem", ("compare", "df['a'] > 0", None))
    assert registry.classify(mask).name == "filter"
    cols = call("getitem", ("str_list", "['a', 'b']", ("a", "b")))
    assert registry.classify(cols).name == "select"
    single = call("getitem", ("str", "'a'", "a"))
    assert registry.classify(single).name == "select"


def test_registry_counts(registry):
    assert len(registry.types) == 30
    assert sum(1 for t in registry.types.values() if t.is_target) == 12
    changing = [t.name for t in registry.types.values()
                if t.is_schema_changing and t.name != "unknown"]
    assert len(changing) == 15
    assert registry.unknown.is_schema_changing and not registry.unknown.is_target


def test_classification_permutation_invariant():
    entries = json.loads(
        (Path(__file__).parents[1] / "src/noteflow/data/transforms.json").read_text())
    shuffled = list(entries)
    random.Random(7).shuffle(shuffled)
    a, b = TransformRegistry(entries), TransformRegistry(shuffled)
    for func in ("fillna", "getitem", "merge", "nonexistent"):
        assert a.classify(call(func)).name == b.classify(call(func)).name


def test_registry_validation_rejects_bad_files(tmp_path):
    bad = tmp_path / "t.json"
    bad.write_text(json.dumps([{"func": "x", "type": "unknown",
                                "is_target": False, "schema_changing": True}]))
    with pytest.raises(RegistrySchemaError):
        TransformRegistry.load(str(bad))


def test_golden_corpus_classification(registry):
    corpus = json.loads((FIXTURES / "classification_corpus.json").read_text())
    assert len(corpus) >= 40
    covered = set()
    failures = []
    for entry in corpus:
        ir = parse_statement(entry["raw"], 1, 1)
        label = registry.reduce_chain(ir.calls).name if ir.calls else "-"
        if label != entry["type"]:
            failures.append((entry["raw"], entry["type"], label))
        if len(ir.calls) != entry["chain"]:
            failures.append((entry["raw"], f"chain {entry['chain']}", len(ir.calls)))
        covered.add(entry["type"])
    assert not failures, failures
    targets = {"mutate", "filter", "aggregate", "sort", "fill", "replace",
               "unfold", "extract", "deduplicate", "fold", "separate", "merge"}
    assert targets <= covered


# --- column maps ---------------------------------------------------------

def test_mutate_pairs_new_column_with_source(registry):
    ir = parse_statement("df['B'] = df['A'] * 2", 1, 1)
    ttype = registry.reduce_chain(ir.calls)
    cmap = derive_statement_map(ttype, ir.calls, ["A"], ["A", "B"])
    assert ("A", "B") in cmap.pairs
    assert ("A", "A") in cmap.pairs
    assert cmap.added == () and cmap.removed == ()


def test_sort_is_identity(registry):
    ir = parse_statement("df2 = df.sort_values('a')", 1, 1)
    ttype = registry.reduce_chain(ir.calls)
    cmap = derive_statement_map(ttype, ir.calls, ["a", "b"], ["a", "b"])
    assert cmap.pairs == (("a", "a"), ("b", "b"))
    assert cmap.added == () and cmap.removed == ()


def test_groupby_mean_map_keeps_keys_and_values(registry):
    # out schema frozen from running the aggregation with as_index=False:
    # groupby('cylinder').mean(numeric_only=True) keeps cylinder and mpg,
    # drops the non-numeric name column.
    ir = parse_statement(
        "df2 = df.groupby('cylinder', as_index=False).mean(numeric_only=True)", 1, 1)
    ttype = registry.reduce_chain(ir.calls)
    cmap = derive_statement_map(ttype, ir.calls,
                                ["cylinder", "mpg", "name"], ["cylinder", "mpg"])
    assert set(cmap.pairs) == {("cylinder", "cylinder"), ("mpg", "mpg")}
    assert cmap.removed == ("name",)
    assert cmap.added == ()


def test_rename_uses_static_dictionary(registry):
    ir = parse_statement("df2 = df.rename(columns={'old': 'new'})", 1, 1)
    ttype = registry.reduce_chain(ir.calls)
    cmap = derive_statement_map(ttype, ir.calls, ["old", "keep"], ["new", "keep"])
    assert ("old", "new") in cmap.pairs
    assert ("keep", "keep") in cmap.pairs
    assert cmap.added == () and cmap.removed == ()


def test_ambiguous_mutate_falls_back_to_schema_diff(registry):
    ir = parse_statement("df['C'] = df['A'] + df['B']", 1, 1)
    ttype = registry.reduce_chain(ir.calls)
    cmap = derive_statement_map(ttype, ir.calls, ["A", "B"], ["A", "B", "C"])
    assert all(dst != "C" for _, dst in cmap.pairs)
    assert cmap.added == ("C",)
    assert cmap.warnings


def test_single_call_map_wrapper(registry):
    c = call("drop", refs=("junk",))
    ttype = registry.classify(c)
    cmap = derive_column_map(ttype, c, ["a", "junk"], ["a"])
    assert cmap.pairs == (("a", "a"),)
    assert cmap.removed == ("junk",)


def test_column_map_coverage_invariant(registry):
    rng = random.Random(11)
    type_names = sorted(registry.types)
    pool = [f"c{i}" for i in range(8)]
    for _ in range(200):
        ttype = registry.types[rng.choice(type_names)]
        in_schema = rng.sample(pool, rng.randint(0, 6))
        if ttype.is_schema_changing:
            out_schema = rng.sample(pool, rng.randint(0, 6))
        else:
            out_schema = list(in_schema)
        cmap = derive_statement_map(ttype, (), in_schema, out_schema)
        out_covered = {dst for _, dst in cmap.pairs} | set(cmap.added)
        in_covered = {src for src, _ in cmap.pairs} | set(cmap.removed)
        assert out_covered == set(out_schema)
        assert in_covered == set(in_schema)


def test_non_schema_changing_identity_bijection(registry):
    for name in ("filter", "sort", "fill", "replace", "deduplicate", "sample",
                 "head", "copy"):
        ttype = registry.types[name]
        cmap = derive_statement_map(ttype, (), ["x", "y"], ["x", "y"])
        assert cmap.pairs == (("x", "x"), ("y", "y"))
