import datetime
from io import BytesIO
from typing import List, Optional
from xml.sax.saxutils import escape

from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import inch
from reportlab.platypus import SimpleDocTemplate, Table, TableStyle, Paragraph, Spacer

from app.models import ExpEquation, OutcomeKind, PipelineReport, SieveOutcome, Slot
from .parsing import format_modulus, render

# --- STYLING CONSTANTS ---
styles = getSampleStyleSheet()
TITLE_STYLE = styles['h1']
HEADER_STYLE = styles['h2']
BODY_STYLE = styles['BodyText']
BRAND_COLOR = colors.HexColor("#00AEEF")
DARK_TEXT = colors.HexColor("#2C3E50")
LIGHT_TEXT = colors.HexColor("#FFFFFF")
GRID_COLOR = colors.HexColor("#BDC3C7")
PASS_COLOR = colors.HexColor("#27AE60")
FAIL_COLOR = colors.HexColor("#C0392B")

MONO_STYLE = ParagraphStyle(
    'Mono',
    parent=BODY_STYLE,
    fontName='Courier',
    fontSize=8,
    leading=10,
)

SUBHEADER_STYLE = ParagraphStyle(
    'SubHeader',
    parent=BODY_STYLE,
    fontName='Helvetica-Bold',
    fontSize=12,
    spaceAfter=8,
    spaceBefore=8,
    textColor=DARK_TEXT,
)

MAX_LISTED_ENTRIES = 60


def _table_style(extra: Optional[list] = None) -> TableStyle:
    return TableStyle([
        ('BACKGROUND', (0, 0), (-1, 0), BRAND_COLOR),
        ('TEXTCOLOR', (0, 0), (-1, 0), LIGHT_TEXT),
        ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
        ('BACKGROUND', (0, 1), (-1, -1), colors.whitesmoke),
        ('GRID', (0, 0), (-1, -1), 1, GRID_COLOR),
        ('TOPPADDING', (0, 1), (-1, -1), 4),
        ('BOTTOMPADDING', (0, 1), (-1, -1), 4),
        *(extra or []),
    ])


def _document(buffer: BytesIO) -> SimpleDocTemplate:
    return SimpleDocTemplate(buffer, pagesize=letter, rightMargin=inch, leftMargin=inch, topMargin=inch, bottomMargin=inch)


def _footer(story: list) -> None:
    story.append(Spacer(1, 0.4 * inch))
    story.append(Paragraph(f"Generated on: {datetime.datetime.now().strftime('%Y-%m-%d %H:%M:%S')} by expsieve", styles['Normal']))


def _text(text: str, style: ParagraphStyle) -> Paragraph:
    # Paragraph parses markup; "<" in comparisons must be escaped
    return Paragraph(escape(text), style)


def _slot_text(slot: Slot, period: int) -> str:
    return str(slot.value) if slot.explicit else f"{slot.value} (mod {period})"


def _outcome_flowables(outcome: SieveOutcome) -> list:
    flowables = [_text(f"Outcome: {outcome.summary()}", SUBHEADER_STYLE)]
    flowables.append(Paragraph("Moduli: " + ", ".join(format_modulus(M) for M in outcome.moduli), BODY_STYLE))

    if len(outcome.steps) > 1:
        data = [['Modulus', 'Entries', 'All-class', 'Periods', 'Result']]
        for step in outcome.steps:
            data.append([format_modulus(step.modulus), step.entries, step.all_class_entries,
                         ", ".join(map(str, step.periods)), step.kind.value])
        table = Table(data, colWidths=[1.6 * inch, 0.8 * inch, 0.9 * inch, 1.6 * inch, 1.4 * inch])
        table.setStyle(_table_style())
        flowables += [Spacer(1, 0.15 * inch), table]

    system = outcome.survivors
    if system is not None and outcome.kind != OutcomeKind.NO_SOLUTION:
        flowables.append(Spacer(1, 0.15 * inch))
        flowables.append(_text(
            f"Surviving entries ({system.size}; thresholds {system.thresholds}, periods {system.moduli})", BODY_STYLE))
        data = [list(system.variables)]
        for entry in system.entries[:MAX_LISTED_ENTRIES]:
            data.append([_slot_text(slot, period) for slot, period in zip(entry, system.moduli)])
        table = Table(data)
        table.setStyle(_table_style())
        flowables.append(table)
        if system.size > MAX_LISTED_ENTRIES:
            flowables.append(Paragraph(f"... {system.size - MAX_LISTED_ENTRIES} more entries omitted", BODY_STYLE))
    return flowables


def generate_outcome_pdf(eq: ExpEquation, outcome: SieveOutcome, constraints: List[str]) -> bytes:
    """Certificate sheet for one sieve or chain run."""
    buffer = BytesIO()
    doc = _document(buffer)
    story = [Paragraph("Modular Sieve Certificate", TITLE_STYLE), Spacer(1, 0.2 * inch)]
    story.append(_text(f"Equation: {render(eq)}", MONO_STYLE))
    story.append(_text("Constraints: " + (", ".join(constraints) or "none"), BODY_STYLE))
    story.append(Spacer(1, 0.15 * inch))
    story += _outcome_flowables(outcome)
    _footer(story)
    doc.build(story)
    return buffer.getvalue()


def generate_pipeline_pdf(report: PipelineReport) -> bytes:
    """Stage-by-stage account of the full verification run."""
    buffer = BytesIO()
    doc = _document(buffer)
    story = [Paragraph("Verification Report", TITLE_STYLE), Spacer(1, 0.2 * inch)]

    story.append(Paragraph("Solutions (n, x, y, z, w)", HEADER_STYLE))
    for solution in report.solutions:
        story.append(Paragraph(str(tuple(solution)), MONO_STYLE))
    story.append(Spacer(1, 0.25 * inch))

    story.append(Paragraph("Stages", HEADER_STYLE))
    data = [['Stage', 'Claim', 'Method', 'Result', 'Seconds']]
    status_styles = []
    for row, stage in enumerate(report.stages, start=1):
        data.append([
            stage.name,
            _text(stage.claim, BODY_STYLE),
            _text(stage.method, BODY_STYLE),
            "verified" if stage.verified else "FAILED",
            f"{report.timing.get(stage.name, 0.0):.2f}",
        ])
        status_styles.append(('TEXTCOLOR', (3, row), (3, row), PASS_COLOR if stage.verified else FAIL_COLOR))
    table = Table(data, colWidths=[1.0 * inch, 2.4 * inch, 1.8 * inch, 0.7 * inch, 0.6 * inch])
    table.setStyle(_table_style(status_styles))
    story.append(table)

    if report.certificates:
        story.append(Spacer(1, 0.25 * inch))
        story.append(Paragraph("Certificates", HEADER_STYLE))
        data = [['Label', 'Kind', 'Moduli', 'Outcome']]
        for cert in report.certificates:
            if cert.outcome is not None:
                result = cert.outcome.summary()
            else:
                result = f"{cert.bound.operation} = {cert.bound.value}"
            data.append([_text(cert.label, BODY_STYLE), cert.kind.value,
                         _text(", ".join(cert.moduli) or "-", BODY_STYLE), _text(result, BODY_STYLE)])
        table = Table(data, colWidths=[1.8 * inch, 0.6 * inch, 2.2 * inch, 1.9 * inch])
        table.setStyle(_table_style())
        story.append(table)

    _footer(story)
    doc.build(story)
    return buffer.getvalue()
