import json

import pytest

from noteflow.errors import MalformedNotebook, TraceCellMismatch
from noteflow.ingest import build_trace, load_notebook


def make_notebook(path, cells):
    doc = {"nbformat": 4, "nbformat_minor": 5, "metadata": {}, "cells": cells}
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def code_cell(source, count=1):
    return {"cell_type": "code", "execution_count": count, "source": source,
            "outputs": [], "metadata": {}}


def md_cell(text):
    return {"cell_type": "markdown", "source": text, "metadata": {}}


def test_markdown_cells_excluded(tmp_path):
    nb = make_notebook(tmp_path / "nb.ipynb", [
        code_cell("a = 1"), md_cell("# title"), code_cell("b = 2"),
        md_cell("notes"), code_cell("c = 3"),
    ])
    cells = load_notebook(nb)
    assert len(cells) == 3
    assert [pos for pos, _, _ in cells] == [0, 2, 4]


def test_source_split_into_physical_lines(tmp_path):
    nb = make_notebook(tmp_path / "nb.ipynb", [code_cell("df = load()\ndf.head()")])
    (_, _, lines), = load_notebook(nb)
    assert lines == ("df = load()", "df.head()")


def test_exec_counts_roundtrip_in_document_order(tmp_path):
    nb = make_notebook(tmp_path / "nb.ipynb", [
        code_cell("a = 1", 1), code_cell("b = 2", 3), code_cell("c = 3", 2),
    ])
    cells = load_notebook(nb)
    assert [count for _, count, _ in cells] == [1, 3, 2]


def test_source_as_list_of_lines(tmp_path):
    nb = make_notebook(tmp_path / "nb.ipynb",
                       [code_cell(["x = 1\n", "y = 2"])])
    (_, _, lines), = load_notebook(nb)
    assert lines == ("x = 1", "y = 2")


def test_malformed_notebook(tmp_path):
    path = tmp_path / "bad.ipynb"
    path.write_text("not json", encoding="utf-8")
    with pytest.raises(MalformedNotebook):
        load_notebook(path)
    path.write_text(json.dumps({"no_cells": []}), encoding="utf-8")
    with pytest.raises(MalformedNotebook):
        load_notebook(path)


def test_empty_notebook_is_not_an_error(tmp_path):
    nb = make_notebook(tmp_path / "nb.ipynb", [md_cell("only prose")])
    assert load_notebook(nb) == []


def test_static_mode_orders_by_exec_count():
    cells = [(0, 2, ("a",)), (1, 1, ("b",)), (2, 3, ("c",))]
    trace = build_trace(cells)
    assert [e.cell_pos for e in trace.executions] == [1, 0, 2]
    assert [e.epoch for e in trace.executions] == [1, 2, 3]


def test_static_mode_drops_never_executed_cells():
    cells = [(0, 1, ("a",)), (1, None, ("b",))]
    trace = build_trace(cells)
    assert len(trace.executions) == 1
    assert trace.executions[0].cell_pos == 0


def test_log_mode_rerun_appears_later():
    cells = [(i, i + 1, (f"s{i}",)) for i in range(5)]
    log = [{"epoch": i + 1, "cell_pos": i, "exec_count": i + 1, "source": [f"s{i}"]}
           for i in range(5)]
    log.append({"epoch": 6, "cell_pos": 3, "exec_count": 6, "source": ["s3 edited"]})
    trace = build_trace(cells, log)
    assert len(trace.executions) == 6
    positions = [e.cell_pos for e in trace.executions]
    assert positions.count(3) == 2
    assert positions[3] == 3 and positions[5] == 3
    assert trace.executions[5].exec_count == 6
    assert trace.executions[5].source_lines == ("s3 edited",)


def test_log_mode_rejects_unknown_cell_pos():
    cells = [(0, 1, ("a",))]
    with pytest.raises(TraceCellMismatch):
        build_trace(cells, [{"epoch": 1, "cell_pos": 7, "exec_count": 1, "source": ["x"]}])


def test_epochs_strictly_increasing_and_deterministic():
    cells = [(i, 10 - i, (f"s{i}",)) for i in range(5)]
    t1 = build_trace(cells)
    t2 = build_trace(cells)
    assert t1 == t2
    epochs = [e.epoch for e in t1.executions]
    assert epochs == sorted(epochs) and len(set(epochs)) == len(epochs)


def test_log_source_lines_without_newlines():
    cells = [(0, 1, ("import pandas as pd", "df = load()"))]
    log = [{"epoch": 1, "cell_pos": 0, "exec_count": 1,
            "source": ["import pandas as pd", "df = load()"]}]
    trace = build_trace(cells, log)
    assert trace.executions[0].source_lines == ("import pandas as pd", "df = load()")
    log2 = [{"epoch": 1, "cell_pos": 0, "exec_count": 1,
             "source": ["import pandas as pd\n", "df = load()"]}]
    assert build_trace(cells, log2).executions[0].source_lines == \
        ("import pandas as pd", "df = load()")
