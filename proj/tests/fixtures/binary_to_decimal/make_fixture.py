#!/usr/bin/env python3
"""Regenerates the BinarytoDecimal fixture: six traces, labels and the
statement / branch / def-use coverage matrices.

The traced program converts an 8-character binary string to an int by
summing byte-cast powers of two, so a leading '1' overflows to -128.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent

INPUTS = {
    "t1": "00101111",
    "t2": "01011101",
    "t3": "01111100",
    "t4": "01111101",
    "t5": "11101111",
    "t6": "10110101",
}
FAILING = {"t5", "t6"}

MAIN = "BinarytoDecimal.main([Ljava/lang/String;)V"
DECIMAL = "BinarytoDecimal.decimal(Ljava/lang/String;)I"


def byte(x):
    return (x + 128) % 256 - 128


def event(kind, method, offset, **payload):
    record = {"k": kind, "m": method, "o": offset, "t": 0}
    record.update(payload)
    return json.dumps(record, separators=(",", ":"))


def trace(binary):
    lines = [
        event("entry", MAIN, 0, s=binary),
        event("entry", DECIMAL, 0, s=binary),
        event("def", DECIMAL, 2, v=0),  # decimal = 0
        event("def", DECIMAL, 3, v=0),  # i = 0
    ]
    decimal = 0
    for i, bit in enumerate(binary):
        # The illustration lists seven initializations of increment for an
        # eight-iteration loop; the fixture reproduces that stream as given.
        if i < 7:
            lines.append(event("def", DECIMAL, 4, v=0))
        increment = 0
        if bit == "1":
            increment = byte(2 ** (7 - i))
            lines.append(event("def", DECIMAL, 6, v=increment))
        decimal += increment
        lines.append(event("def", DECIMAL, 7, v=decimal))
        lines.append(event("def", DECIMAL, 33, v=i))  # i++ (second def site on line 3)
    lines.append(event("ret", DECIMAL, 8, v=decimal))
    return "\n".join(lines) + "\n"


def matrix(columns):
    rows = ["test_id," + ",".join(columns)]
    for test in INPUTS:
        rows.append(test + "," + ",".join("1" for _ in columns))
    return "\n".join(rows) + "\n"


def main():
    for test, binary in INPUTS.items():
        (HERE / f"{test}.trace").write_text(trace(binary))
    (HERE / "tests.txt").write_text("\n".join(INPUTS) + "\n")
    labels = ["test_id,verdict,defect_id"]
    for test in INPUTS:
        labels.append(f"{test},fail,d1" if test in FAILING else f"{test},pass,")
    (HERE / "labels.csv").write_text("\n".join(labels) + "\n")

    (HERE / "bb.csv").write_text(matrix([f"s{n}" for n in range(1, 9)]))
    (HERE / "bbe.csv").write_text(matrix(["b3_4", "b3_8", "b5_6", "b5_7"]))
    (HERE / "dup.csv").write_text(matrix([
        "dup_i_3_5", "dup_binary_1_3", "dup_binary_1_5", "dup_increment_4_7",
        "dup_increment_6_7", "dup_decimal_2_7", "dup_decimal_7_8"]))


if __name__ == "__main__":
    main()
