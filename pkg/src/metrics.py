"""
Refinement Metrics Module
Tracks partition-refinement rounds and summarizes them
"""
from dataclasses import dataclass, field
from typing import List, Optional


@dataclass
class RefinementStats:
    """
    Data structure to store the course of one partition refinement
    """
    label: str
    states: int = 0
    iterations: int = 0
    block_counts: List[int] = field(default_factory=list)
    signature_evaluations: int = 0

    @property
    def final_blocks(self) -> int:
        return self.block_counts[-1] if self.block_counts else 0

    def to_dict(self) -> dict:
        """Convert stats to dictionary for JSON export"""
        return {
            'label': self.label,
            'states': self.states,
            'iterations': self.iterations,
            'block_counts': list(self.block_counts),
            'signature_evaluations': self.signature_evaluations,
        }

    def __str__(self) -> str:
        """Plain-text report; repeated runs print the same text"""
        rounds = " -> ".join(str(count) for count in self.block_counts)
        return (
            f"\n{'=' * 60}\n"
            f"Refinement: {self.label}\n"
            f"{'=' * 60}\n"
            f"States: {self.states}\n"
            f"Rounds: {self.iterations}\n"
            f"Blocks per round: {rounds}\n"
            f"Final blocks: {self.final_blocks}\n"
            f"Signatures computed: {self.signature_evaluations}\n"
            f"{'=' * 60}\n"
        )


class RefinementTracker:
    """
    Collects per-round block counts while refine runs
    """

    def __init__(self):
        self.block_counts: List[int] = []
        self.signature_evaluations: int = 0

    def start_tracking(self, initial_blocks: int = 1):
        """Start tracking a refinement that begins with initial_blocks blocks"""
        self.block_counts = [initial_blocks]
        self.signature_evaluations = 0

    def record_round(self, block_count: int, evaluations: int):
        self.block_counts.append(block_count)
        self.signature_evaluations += evaluations

    def create_stats(self, label: str, states: int) -> RefinementStats:
        """
        Create stats object from tracked data

        Args:
            label: Name shown in reports
            states: Size of the refined state space

        Returns:
            RefinementStats object
        """
        return RefinementStats(
            label=label,
            states=states,
            iterations=len(self.block_counts) - 1,
            block_counts=list(self.block_counts),
            signature_evaluations=self.signature_evaluations,
        )


class StatsComparator:
    """
    Tabulates refinement stats across several checks
    """

    def __init__(self):
        self.all_stats: List[RefinementStats] = []

    def add_stats(self, stats: RefinementStats):
        self.all_stats.append(stats)

    def get_comparison_table(self) -> str:
        """Generate comparison table"""
        if not self.all_stats:
            return "No refinements to compare"

        header = f"{'Check':<40} {'States':<8} {'Rounds':<8} {'Blocks':<8}"
        separator = "=" * 66
        rows = [separator, header, separator]
        for s in self.all_stats:
            rows.append(f"{s.label[:39]:<40} {s.states:<8} {s.iterations:<8} {s.final_blocks:<8}")
        rows.append(separator)
        return "\n".join(rows)

    def get_largest(self) -> Optional[RefinementStats]:
        if not self.all_stats:
            return None
        return max(self.all_stats, key=lambda s: s.states)

    def clear(self):
        self.all_stats.clear()
