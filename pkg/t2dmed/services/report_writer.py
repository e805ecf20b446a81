"""
Writes and reads experiment output files.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from t2dmed.models.report import EvaluationReport
from t2dmed.services.figure_service import figure_service
from t2dmed.utils.errors import DataError

logger = logging.getLogger(__name__)

REPORT_JSON = 'report.json'
REPORT_CSV = 'report.csv'
PCA_POINTS_JSON = 'pca_points.json'
PARTIAL_REPORT_JSON = 'partial_report.json'


def _dump(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + '\n'


@dataclass
class PcaPoints:
    """Projected test rows with the class each is coloured by."""
    points: np.ndarray
    labels: List[str]
    explained_variance_ratio: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'points': self.points.tolist(),
            'labels': list(self.labels),
            'explained_variance_ratio': list(self.explained_variance_ratio),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PcaPoints':
        labels = [str(label) for label in data['labels']]
        points = np.asarray(data['points'], dtype=np.float64).reshape(len(labels), -1)
        return cls(points, labels, [float(v) for v in data.get('explained_variance_ratio', [])])


class ReportWriter:
    """Report JSON/CSV, PCA points, figures and partial reports."""

    def write_report(self, report: EvaluationReport, pca: Optional[PcaPoints],
                     output_dir: Union[str, Path]) -> Dict[str, Path]:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            'report_json': output_dir / REPORT_JSON,
            'report_csv': output_dir / REPORT_CSV,
        }
        paths['report_json'].write_text(_dump(report.to_dict()), encoding='utf-8')
        paths['report_csv'].write_text(report.to_csv(), encoding='utf-8')
        if pca is not None:
            paths['pca_points'] = output_dir / PCA_POINTS_JSON
            paths['pca_points'].write_text(_dump(pca.to_dict()), encoding='utf-8')
        paths.update(self._figures(report, pca, output_dir))
        stale = output_dir / PARTIAL_REPORT_JSON
        if stale.exists():
            stale.unlink()
        logger.info(f"Report written to {output_dir}")
        return paths

    def _figures(self, report: EvaluationReport, pca: Optional[PcaPoints], output_dir: Path) -> Dict[str, Path]:
        if pca is None:
            return figure_service.emit_figures(report, None, [], output_dir)
        return figure_service.emit_figures(report, pca.points, pca.labels, output_dir,
                                           pca.explained_variance_ratio)

    def write_partial(self, output_dir: Union[str, Path], stage: str, error: Exception,
                      completed: List[str], metadata: Dict[str, Any]) -> Path:
        """Record how far a failed run got."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / PARTIAL_REPORT_JSON
        path.write_text(_dump({
            'status': 'failed',
            'failed_stage': stage,
            'error': str(error),
            'error_type': type(error).__name__,
            'completed_stages': list(completed),
            'metadata': metadata,
        }), encoding='utf-8')
        logger.error(f"Stage '{stage}' failed; partial report written to {path}")
        return path

    def load_report(self, input_dir: Union[str, Path]):
        """Read report.json and, when present, pca_points.json from a run directory."""
        input_dir = Path(input_dir)
        report_path = input_dir / REPORT_JSON
        if not report_path.exists():
            raise DataError(f"No {REPORT_JSON} in {input_dir}")
        try:
            report = EvaluationReport.from_dict(json.loads(report_path.read_text(encoding='utf-8')))
            pca_path = input_dir / PCA_POINTS_JSON
            pca = None
            if pca_path.exists():
                pca = PcaPoints.from_dict(json.loads(pca_path.read_text(encoding='utf-8')))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise DataError(f"Cannot read report files in {input_dir}: {e}") from e
        return report, pca

    def reemit(self, input_dir: Union[str, Path]) -> Dict[str, Path]:
        """Regenerate the CSV and figures from saved report files."""
        report, pca = self.load_report(input_dir)
        input_dir = Path(input_dir)
        paths = {'report_csv': input_dir / REPORT_CSV}
        paths['report_csv'].write_text(report.to_csv(), encoding='utf-8')
        if pca is None:
            logger.warning(f"No {PCA_POINTS_JSON} in {input_dir}; scatter not regenerated")
        paths.update(self._figures(report, pca, input_dir))
        return paths


# Global writer instance
report_writer = ReportWriter()
