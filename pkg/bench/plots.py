"""
Plotly charts for benchmark results, written as standalone HTML.
"""

import logging

import numpy as np
import pandas as pd
import plotly.graph_objects as go

from bench.evaluation import CorrelationReport, SweepGrid
from model.wavelet_bank import LEVELS

logger = logging.getLogger(__name__)


def _layout(fig: go.Figure, title: str, x_title: str, y_title: str) -> go.Figure:
    fig.update_layout(
        title=dict(text=title, font=dict(size=16)),
        hovermode='closest',
        margin=dict(b=40, l=50, r=20, t=50),
        xaxis=dict(title=x_title),
        yaxis=dict(title=y_title),
        plot_bgcolor='white',
    )
    return fig


def scatter_with_fit(report: CorrelationReport) -> go.Figure:
    """Objective scores against subjective scores, with the fitted logistic curve."""
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=report.objective, y=report.mos,
        mode='markers',
        marker=dict(size=6, color='#2E86AB', opacity=0.7),
        name='Pairs',
    ))
    if report.logistic is not None and report.objective:
        xs = np.linspace(min(report.objective), max(report.objective), 200)
        fig.add_trace(go.Scatter(
            x=xs, y=report.logistic.predict(xs),
            mode='lines',
            line=dict(width=2, color='#E4572E'),
            name='Logistic fit',
        ))
    title = f"{report.dataset}: SRCC {report.srcc:.4f}" if report.srcc is not None else report.dataset
    return _layout(fig, title, 'Objective score e', 'Subjective score')


def sweep_heatmap(grid: SweepGrid) -> go.Figure:
    table = grid.cells.pivot(index='k2', columns='k1', values='srcc')
    fig = go.Figure(go.Heatmap(
        z=table.values, x=table.columns, y=table.index,
        colorscale='Viridis',
        colorbar=dict(title='SRCC'),
    ))
    return _layout(fig, 'SRCC over K1 and K2', 'K1', 'K2')


def trend_lines(trend: pd.DataFrame) -> go.Figure:
    """Per-level detail deviation for each image, coarse (s=1) to fine."""
    levels = list(range(1, LEVELS + 1))
    fig = go.Figure()
    for _, row in trend.iterrows():
        fig.add_trace(go.Scatter(
            x=levels, y=[row[f"sigma_{s}"] for s in levels],
            mode='lines+markers',
            name=str(row['image']),
        ))
    return _layout(fig, 'Detail deviation per level', 'Level s (coarse to fine)', 'Standard deviation')


def save_figure(fig: go.Figure, path: str):
    fig.write_html(path, include_plotlyjs='cdn', div_id='iqa-plot')
    logger.info(f"Wrote plot to {path}")
