#!/usr/bin/env python3

import configparser
import csv
import logging
import os
import os.path as os_path
from collections.abc import Iterable, Sequence
from os import PathLike
from pathlib import Path

from charset_normalizer import detect

from prequant.pq_utils import Pq_Procedure_Result

SPECTRUM_HEADER = ("level", "holonomy_re", "holonomy_im", "residual")


class Pq_IO:
    previous_encoding: str = "utf-8"

    @classmethod
    def read_txt(cls, path: str | PathLike, is_guess_encoding: bool = True) -> str:
        if not is_guess_encoding:
            with open(path, encoding="utf-8") as f:
                return f.read()

        try:
            logging.debug(f"Attempting to read {path} with {cls.previous_encoding} encoding...")
            with open(path, encoding=cls.previous_encoding) as f:
                content = f.read()
        except UnicodeDecodeError:
            logging.debug(f"Attempt failed. Reading {path} in binary mode...")
            with open(path, "rb") as f:
                bytes_ = f.read()

            encoding = detect(bytes_)["encoding"]
            if not isinstance(encoding, str):
                raise UnicodeDecodeError("unknown", bytes_, 0, len(bytes_), f"cannot guess the encoding of {path}")
            logging.debug(f"Decoding {path} with {encoding} encoding...")
            content = bytes_.decode(encoding=encoding)
            cls.previous_encoding = encoding

        return content

    @classmethod
    def suffix(cls, file_path: str | PathLike, *, strip_dot: bool = False) -> str:
        """
        >>> Pq_IO.suffix('out/report.ini')
        '.ini'
        >>> Pq_IO.suffix('out/spectrum.csv', strip_dot=True)
        'csv'
        """
        extension = os_path.splitext(file_path)[-1]
        if strip_dot:
            extension = extension.lstrip(".")
        return extension

    @classmethod
    def is_writable(cls, directory: str | PathLike) -> Pq_Procedure_Result:
        """Whether directory exists or can be created, and accepts new files."""
        try:
            Path(directory).mkdir(parents=True, exist_ok=True)
        except OSError as e:
            return False, f"cannot create the output directory {directory}: {e}"
        if not os.access(directory, os.W_OK):
            return False, f"PermissionError: can not write to {directory}"
        return True, None

    @classmethod
    def dump_text(cls, text: str, path: str | PathLike) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except FileNotFoundError:
            Path(path).parent.mkdir(parents=True)
            cls.dump_text(text, path)

    @classmethod
    def dump_config(cls, config: configparser.ConfigParser, path: str | PathLike) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            config.write(f)

    @classmethod
    def load_config(cls, path: str | PathLike) -> configparser.ConfigParser:
        config = new_config()
        config.read_string(cls.read_txt(path), source=str(path))
        return config

    @classmethod
    def dump_csv(cls, rows: Iterable[Sequence], path: str | PathLike, header: Sequence[str] = SPECTRUM_HEADER) -> None:
        """Floats are written with repr."""
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])

    @classmethod
    def load_csv(cls, path: str | PathLike) -> tuple[list[str], list[list[str]]]:
        with open(path, encoding="utf-8", newline="") as f:
            header, *rows = list(csv.reader(f))
        return header, rows

    @classmethod
    def dump_columns(cls, xs: Sequence[float], ys: Sequence[float], path: str | PathLike, comment: str = "") -> None:
        """Two whitespace-separated columns, readable by gnuplot and numpy.loadtxt."""
        lines = [f"# {comment}"] if comment else []
        lines.extend(f"{float(x)!r} {float(y)!r}" for x, y in zip(xs, ys))
        cls.dump_text("\n".join(lines) + "\n", path)

    @classmethod
    def dump_xlsx(cls, sheets: dict[str, list[Sequence]], path: str | PathLike) -> None:
        """One worksheet per table, the spectrum header in bold on each."""
        import openpyxl
        from openpyxl.styles import Font
        from openpyxl.utils import get_column_letter

        workbook = openpyxl.Workbook()
        workbook.remove(workbook.active)
        for title, rows in sheets.items():
            # Excel limits sheet titles to 31 characters
            worksheet = workbook.create_sheet(title[:31])
            worksheet.append(SPECTRUM_HEADER)
            for cell in worksheet[1]:
                cell.font = Font(bold=True)
            for row in rows:
                worksheet.append([None if isinstance(v, float) and v != v else v for v in row])
            for col in range(1, len(SPECTRUM_HEADER) + 1):
                worksheet.column_dimensions[get_column_letter(col)].width = 24
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        workbook.save(path)


def new_config() -> configparser.ConfigParser:
    config = configparser.ConfigParser(interpolation=None)
    # keep key case
    config.optionxform = str  # type:ignore
    return config
