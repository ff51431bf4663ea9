from pathlib import Path
import logging
import sys
import os

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.cli import format_matrix, print_chain
from app.services import reduction
from app.services.riccati_service import RiccatiService
from app.utils import documents

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
WORKED_TRIPLES = ["example1.json", "example2.json", "remark.json", "scalar_dare.json"]


class ExampleReproducer:
    def __init__(self, data_dir: Path = DATA_DIR):
        self.data_dir = data_dir
        self.service = RiccatiService()

    def run(self, name: str):
        """Print the reduction chain, solution set and closed-loop reports of one triple"""
        try:
            document = documents.load_triple(self.data_dir / name)
            tol = documents.document_tolerance(document, self.service.tol)
            sigma = documents.to_triple(document, tol)

            print(f"== {name}")
            chain, solutions = self.service.solve(sigma, tol)
            print_chain(chain, trace=True)
            for family in solutions.families:
                print(f"solution base = {format_matrix(family.base)}")
                for H in family.basis:
                    print(f"  direction = {format_matrix(H)}")
                self._report_steps(chain, family.base, tol)
        except Exception as e:
            logger.error(f"Error reproducing {name}: {str(e)}")
            raise

    def _report_steps(self, chain, X, tol):
        deltas = reduction.restrict(chain, X)
        levels = [X] + deltas[:-1]
        for step, X_step, delta in zip(chain.reduction_steps, levels, deltas):
            report = reduction.closed_loop_report(step, X_step, delta, tol)
            print(f"  {step.kind.value}: block form {report.block_form_holds}, "
                  f"spectrum contained {report.spectrum_contained}")


if __name__ == "__main__":
    reproducer = ExampleReproducer()
    for example in WORKED_TRIPLES:
        reproducer.run(example)
