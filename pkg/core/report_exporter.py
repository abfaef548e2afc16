"""Artifact export for RankSpike: CSV with metadata headers, JSON and PDF summaries."""
import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def package_versions() -> Dict[str, str]:
    """Versions of the numeric stack, echoed into artifact headers."""
    versions = {}
    for name in ("numpy", "scipy", "mpmath"):
        try:
            module = __import__(name)
            versions[name] = getattr(module, "__version__", "unknown")
        except ImportError:
            versions[name] = "missing"
    return versions


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class ReportExporter:
    """Writes run artifacts to CSV, JSON and PDF."""

    @staticmethod
    def default_name(command: str, suffix: str) -> str:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return f"rankspike_{command}_{timestamp}.{suffix}"

    @staticmethod
    def export_csv(rows: Iterable[Sequence], header: Sequence[str], filename: str,
                   metadata: Optional[Dict] = None) -> str:
        """
        Export rows to CSV behind '#'-prefixed metadata lines.

        Args:
            rows: Data rows
            header: Column names
            filename: Output filename
            metadata: Key/value pairs written as '# key: value' lines

        Returns:
            Path to exported file
        """
        try:
            Path(filename).parent.mkdir(parents=True, exist_ok=True)
            with open(filename, 'w', newline='') as f:
                for key, value in (metadata or {}).items():
                    text = json.dumps(value, sort_keys=True, default=_json_default) \
                        if isinstance(value, (dict, list)) else value
                    f.write(f"# {key}: {text}\n")
                writer = csv.writer(f)
                writer.writerow(header)
                count = 0
                for row in rows:
                    writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
                    count += 1
            logger.info(f"Exported {count} CSV rows to {filename}")
            return filename
        except OSError as e:
            logger.error(f"Failed to export CSV: {e}")
            raise

    @staticmethod
    def export_json(result: Dict, filename: str) -> str:
        """
        Export a result dictionary to JSON.

        Args:
            result: Result dictionary
            filename: Output filename

        Returns:
            Path to exported file
        """
        try:
            Path(filename).parent.mkdir(parents=True, exist_ok=True)
            with open(filename, 'w') as f:
                json.dump(result, f, indent=2, sort_keys=True, default=_json_default)
            logger.info(f"Exported JSON report to {filename}")
            return filename
        except (OSError, TypeError) as e:
            logger.error(f"Failed to export JSON: {e}")
            raise

    @staticmethod
    def export_pdf(title: str, summary: Dict, filename: str,
                   sections: Optional[Dict[str, List[str]]] = None) -> str:
        """
        One-page PDF summary: a key/value table followed by short text sections.

        Args:
            title: Report title
            summary: Rows of the summary table
            filename: Output filename
            sections: Heading -> paragraphs

        Returns:
            Path to exported file
        """
        try:
            from reportlab.lib import colors
            from reportlab.lib.pagesizes import letter
            from reportlab.lib.styles import getSampleStyleSheet
            from reportlab.lib.units import inch
            from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle
        except ImportError:
            logger.error("reportlab not installed. Install with: pip install reportlab")
            raise ImportError("reportlab required for PDF export")

        try:
            Path(filename).parent.mkdir(parents=True, exist_ok=True)
            doc = SimpleDocTemplate(filename, pagesize=letter)
            styles = getSampleStyleSheet()
            story = [Paragraph(f"<b>{title}</b>", styles['Title']), Spacer(1, 0.3 * inch)]

            data = [[str(k), _format_cell(v)] for k, v in summary.items()]
            table = Table(data, colWidths=[2.5 * inch, 3.5 * inch])
            table.setStyle(TableStyle([
                ('BACKGROUND', (0, 0), (0, -1), colors.lightgrey),
                ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
                ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
                ('FONTSIZE', (0, 0), (-1, -1), 10),
                ('BOTTOMPADDING', (0, 0), (-1, -1), 6),
                ('GRID', (0, 0), (-1, -1), 0.5, colors.black),
            ]))
            story.append(table)

            for heading, paragraphs in (sections or {}).items():
                story.append(Spacer(1, 0.2 * inch))
                story.append(Paragraph(f"<b>{heading}</b>", styles['Heading2']))
                for text in paragraphs[:20]:
                    story.append(Paragraph(text, styles['Normal']))

            doc.build(story)
            logger.info(f"Exported PDF report to {filename}")
            return filename
        except OSError as e:
            logger.error(f"Failed to export PDF: {e}")
            raise


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
