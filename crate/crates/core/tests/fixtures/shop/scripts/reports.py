import csv


class ReportBuilder:
    def __init__(self, rows):
        self._rows = rows
        self.__cache = None

    def build(self):
        return [self._format(r) for r in self._rows]

    def _format(self, row):
        return ",".join(str(c) for c in row)


def export_report(path, rows):
    builder = ReportBuilder(rows)
    with open(path, "w") as fh:
        fh.write("\n".join(builder.build()))
