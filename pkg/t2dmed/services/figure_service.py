"""
SVG figures: model accuracy comparison and the 2-D PCA view of the test set.

Figures are rendered with matplotlib's SVG backend using a fixed hash salt,
text kept as <text> elements and no date metadata, so identical inputs give
identical bytes.
"""
import io
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib
from matplotlib.figure import Figure
import numpy as np

from t2dmed.models.report import EvaluationReport
from t2dmed.utils.errors import DataError

logger = logging.getLogger(__name__)

BAR_CHART_FILE = 'model_comparison.svg'
SCATTER_FILE = 'pca_test_set.svg'

PALETTE = ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd',
           '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf']

_SVG_RC = {
    'svg.hashsalt': 't2dmed',
    'svg.fonttype': 'none',
    'font.family': 'DejaVu Sans',
}


def _render(figure: Figure) -> str:
    buffer = io.StringIO()
    with matplotlib.rc_context(_SVG_RC):
        figure.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue()


class FigureService:
    """Builds the comparison bar chart and the PCA scatter."""

    def bar_chart_svg(self, report: EvaluationReport) -> str:
        """Holdout accuracy per model, sorted descending; bar i has SVG id ``bar-i``."""
        ranking = report.ranking()
        with matplotlib.rc_context(_SVG_RC):
            figure = Figure(figsize=(8, 4.5))
            ax = figure.add_subplot()
            names = [m.kind for m in ranking]
            values = [m.accuracy for m in ranking]
            bars = ax.bar(range(len(values)), values, color=PALETTE[0])
            for i, (bar, value) in enumerate(zip(bars, values)):
                bar.set_gid(f"bar-{i}")
                ax.text(bar.get_x() + bar.get_width() / 2, value + 0.01, f"{value:.3f}",
                        ha='center', va='bottom', fontsize=8)
            ax.set_xticks(range(len(names)))
            ax.set_xticklabels(names, rotation=30, ha='right')
            ax.set_ylim(0.0, 1.05)
            ax.set_ylabel('Holdout accuracy')
            ax.set_title('Models Performance Comparison')
            figure.tight_layout()
        return _render(figure)

    def scatter_svg(self, points: np.ndarray, labels: Sequence[str], class_labels: Sequence[str],
                    explained: Optional[Sequence[float]] = None) -> str:
        """
        PCA coordinates coloured by class with a legend.

        Points of class i are drawn as one marker group with SVG id ``points-i``.
        Only the first two components are plotted; a single component is
        drawn against zero.
        """
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2:
            points = points.reshape(len(labels), -1)
        xs = points[:, 0] if points.shape[1] > 0 else np.zeros(len(labels))
        ys = points[:, 1] if points.shape[1] > 1 else np.zeros(len(labels))
        labels = [str(label) for label in labels]

        with matplotlib.rc_context(_SVG_RC):
            figure = Figure(figsize=(7, 6))
            ax = figure.add_subplot()
            for i, name in enumerate(class_labels):
                mask = np.array([label == name for label in labels], dtype=bool)
                if not mask.any():
                    continue
                line, = ax.plot(xs[mask], ys[mask], linestyle='none', marker='o', markersize=3,
                                color=PALETTE[i % len(PALETTE)], label=name)
                line.set_gid(f"points-{i}")
            ax.set_xlabel(self._axis_label(1, explained))
            ax.set_ylabel(self._axis_label(2, explained))
            ax.set_title('2-D Visualization of Test Set')
            ax.legend(title='Predicted medication', loc='best', fontsize=8)
            figure.tight_layout()
        return _render(figure)

    def _axis_label(self, component: int, explained: Optional[Sequence[float]]) -> str:
        if explained and len(explained) >= component:
            return f"PC{component} ({100.0 * explained[component - 1]:.1f}% variance)"
        return f"PC{component}"

    def emit_figures(self, report: EvaluationReport, pca_points: Optional[np.ndarray],
                     labels: Sequence[str],
                     output_dir: Union[str, Path], explained: Optional[Sequence[float]] = None) -> Dict[str, Path]:
        """
        Write the bar chart, and the scatter when points are given, into ``output_dir``.

        Returns:
            Mapping of figure name to written path
        """
        if not report.models:
            raise DataError("Cannot draw figures for an empty report")
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        paths = {'bar_chart': output_dir / BAR_CHART_FILE}
        paths['bar_chart'].write_text(self.bar_chart_svg(report), encoding='utf-8')
        if pca_points is not None:
            paths['scatter'] = output_dir / SCATTER_FILE
            paths['scatter'].write_text(
                self.scatter_svg(pca_points, labels, report.class_labels, explained), encoding='utf-8')
        logger.info(f"Wrote figures to {output_dir}")
        return paths


# Global service instance
figure_service = FigureService()
