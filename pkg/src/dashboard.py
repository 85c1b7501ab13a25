"""
Dashboard Module
Charts of finite-branch mass curves and refinement progress
"""
import logging
import os
from fractions import Fraction
from typing import Dict, List, Sequence

import matplotlib
matplotlib.use('Agg')  # Use Agg backend for headless environments
import matplotlib.pyplot as plt
import numpy as np

from src.metrics import RefinementStats

log = logging.getLogger(__name__)


def _prepare(save_path: str):
    directory = os.path.dirname(save_path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def plot_mass_curve(curves: Dict[str, Sequence[Fraction]], save_path: str = "results/mass_curve.png") -> str:
    """
    Plot P^k against k for one or more witness policies

    Args:
        curves: Policy label to masses P^0..P^depth
        save_path: Path to save the chart image

    Returns:
        The path written
    """
    if not curves:
        raise ValueError("no curves to plot")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    fig.suptitle('Finite-branch probability of witness trees', fontsize=14, fontweight='bold')
    colors = plt.cm.viridis(np.linspace(0, 1, len(curves)))

    for color, (label, masses) in zip(colors, sorted(curves.items())):
        depths = np.arange(len(masses))
        values = np.array([float(m) for m in masses])
        ax1.plot(depths, values, marker='o', markersize=3, color=color, label=label)
        # Remaining mass on a log scale; exact zeros are dropped
        remaining = 1.0 - values
        visible = remaining > 0
        if visible.any():
            ax2.semilogy(depths[visible], remaining[visible], marker='.', color=color, label=label)

    ax1.set_xlabel('Depth k')
    ax1.set_ylabel('P^k')
    ax1.set_ylim(-0.05, 1.05)
    ax1.set_title('Mass of finite branches')
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=8)

    ax2.set_xlabel('Depth k')
    ax2.set_ylabel('1 - P^k')
    ax2.set_title('Mass still open')
    ax2.grid(alpha=0.3)

    plt.tight_layout()
    _prepare(save_path)
    plt.savefig(save_path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    log.info(f"mass curve saved to {save_path}")
    return save_path


def plot_refinement(stats: List[RefinementStats], save_path: str = "results/refinement.png") -> str:
    """
    Plot block count per refinement round, one line per refinement

    Args:
        stats: Refinement runs to compare
        save_path: Path to save the chart image

    Returns:
        The path written
    """
    if not stats:
        raise ValueError("no refinement stats to plot")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    fig.suptitle('Partition refinement', fontsize=14, fontweight='bold')
    colors = plt.cm.tab10(np.linspace(0, 1, len(stats)))

    for color, s in zip(colors, stats):
        rounds = np.arange(len(s.block_counts))
        ax1.step(rounds, s.block_counts, where='post', color=color, label=s.label[:40])
    ax1.set_xlabel('Round')
    ax1.set_ylabel('Blocks')
    ax1.set_title('Blocks per round')
    ax1.grid(alpha=0.3)
    ax1.legend(fontsize=7)

    labels = [s.label[:20] for s in stats]
    positions = np.arange(len(stats))
    bars = ax2.bar(positions, [s.states for s in stats], color=colors, alpha=0.4, label='states')
    ax2.bar(positions, [s.final_blocks for s in stats], color=colors, label='blocks')
    ax2.set_xticks(positions)
    ax2.set_xticklabels(labels, rotation=45, ha='right', fontsize=8)
    ax2.set_title('States vs. final blocks')
    ax2.grid(axis='y', alpha=0.3)
    for bar, s in zip(bars, stats):
        ax2.text(bar.get_x() + bar.get_width() / 2., bar.get_height(),
                 f'{s.final_blocks}/{s.states}', ha='center', va='bottom', fontsize=8)

    plt.tight_layout()
    _prepare(save_path)
    plt.savefig(save_path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    log.info(f"refinement chart saved to {save_path}")
    return save_path
