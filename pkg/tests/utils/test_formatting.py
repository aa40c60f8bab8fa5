from promptssl.utils.formatting import format_table, format_value


def test_format_value():
    """Test cell formatting."""
    assert format_value(80.6234) == "80.62"
    assert format_value(None) == "-"
    assert format_value(3) == "3"


def test_format_table():
    """Test markdown table layout."""
    table = format_table(["Dataset", "HM"], [["toy4", 71.666]])

    assert table.splitlines() == [
        "| Dataset | HM |",
        "| ---- | ---- |",
        "| toy4 | 71.67 |",
    ]
