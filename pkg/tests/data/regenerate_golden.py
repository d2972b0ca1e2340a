"""Rewrite the golden 64 x 64 diagram rasters (run only after an intended change)."""
from pathlib import Path

from colligative.diagram import GridSpec, raster, write_csv
from colligative.rates import ModelParams

PARAMS = ModelParams(d=2, m_star=0.8, w1=1.0, kappa=1.0)
GRID = GridSpec(xi_min=0.0, xi_max=4.0, b_min=-3.0, b_max=1.0, n_xi=64, n_b=64)
HERE = Path(__file__).parent


def golden_path(bc: str) -> Path:
    return HERE / f"diagram_{bc}_64x64.csv"


if __name__ == "__main__":
    for bc in ("plus", "minus"):
        write_csv(raster(PARAMS, bc, GRID), golden_path(bc))
        print(golden_path(bc))
