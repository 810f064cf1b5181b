"""Smoke test for the pyhexsom extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/pyhexsom-*.whl
"""

import json
import os
import sys
import tempfile
import xml.etree.ElementTree as ET

import pyhexsom as hs

DOCS = [
    {"id": "c1", "text": "My ATM card was blocked and the bank charged a fee", "severity": 2},
    {"id": "c2", "text": "Loan interest rate increased without any notice", "severity": 1},
    {"id": "c3", "text": "ATM machine swallowed the card, blocked again", "severity": 2},
    {"id": "c4", "text": "Home loan installment deducted twice this month"},
    {"id": "c5", "text": "Credit card fee reversal still pending", "severity": 1},
    {"id": "c6", "text": "Loan statement shows wrong interest amount", "severity": 1},
    {"id": "c7", "text": "Debit card blocked at the ATM while travelling", "severity": 2},
    {"id": "c8", "text": "Personal loan interest charged beyond the agreed rate", "severity": 1},
]


def main():
    assert hs.tokenize("The ATM card, BLOCKED!") == ["atm", "card", "blocked"]

    corpus = hs.Corpus.from_jsonl("\n".join(json.dumps(d) for d in DOCS))
    assert len(corpus) == 8 and corpus.ids[0] == "c1"
    matrix, zeros = corpus.matrix("tfidf")
    assert zeros == 0 and matrix.shape == (8, len(corpus.vocabulary))

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "docs.dtm")
        matrix.save(path)
        assert hs.Matrix.load(path).to_dense() == matrix.to_dense()

    geometry = hs.map_geometry(matrix)
    serial = hs.train(matrix, geometry, engine="serial", seed=3)
    strict = hs.train(matrix, geometry, engine="parallel-strict", workers=3, seed=3)
    fast = hs.train(matrix, geometry, engine="parallel-fast", workers=2, seed=3)
    assert bytes(serial.encode()) == bytes(strict.encode())
    assert abs(serial.quantization_error - fast.quantization_error) < 1e-6
    assert hs.TrainedMap.decode(bytes(serial.encode())).codebook() == serial.codebook()

    nn = geometry.nrows * geometry.ncols
    assert len(serial.assign(matrix)) == 8
    assert len(serial.similarity_colors()) == nn

    decorations = json.loads(serial.decorations(matrix, corpus.severities))
    assert sum(d["docCount"] for d in decorations) == 8
    svg = serial.render_svg(matrix, corpus.severities, show_counts=True, title="smoke")
    polygons = ET.fromstring(svg).findall(".//{http://www.w3.org/2000/svg}polygon")
    assert len(polygons) == nn

    try:
        hs.train(matrix, engine="quantum")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown engine accepted")

    synth, labels = hs.synth_corpus(3, 20, 60, 0.9, seed=1)
    assert synth.shape == (60, 60) and sorted(set(labels)) == [0, 1, 2]
    small = hs.map_geometry(synth).with_override(3, 3, 200)
    parity = hs.compare_engines(synth, "synth", small, workers=2).splitlines()
    assert [row.split(",")[0] for row in parity[1:]] == ["serial", "parallel-strict", "parallel-fast"]
    scaling = hs.scaling_study([4, 8], dim=8, samples=40, iterations=100, repeats=1, workers=2)
    assert len(scaling.splitlines()) == 5

    print("pyhexsom smoke test: OK")


if __name__ == "__main__":
    sys.exit(main())
