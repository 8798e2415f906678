"""Writes the synthetic ledgers used by the loja fixtures.

Energy gap D_k = 3^-k with limit energy 0, and |z|_2 = D_k^(1 - theta).
The ratio 1/3 makes the default limit estimate (last energy minus half the
last drop) equal to 0 exactly, so the fit sees exact log-linear data.
"""
import sys
from pathlib import Path

HEADER = "t,step,E_total,E_kin,E_willmore,E_penalty,area,mass_mean,u_l2,grad_u_l2,z_l2,grad_z_l2,psi_h1,psi_h3,residual"


def write(path: Path, theta: float, rows: int = 30) -> None:
    lines = [HEADER]
    for k in range(rows):
        gap = 3.0 ** (-k)
        z = gap ** (1.0 - theta)
        vals = [float(k), k, gap, 0.0, gap, 0.0, 1.0, 0.0, 0.0, 0.0, z, z, 1.0, 1.0, 0.0]
        lines.append(",".join(str(v) if isinstance(v, int) else repr(v) for v in vals))
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    write(out / "loja_theta050.csv", 0.5)
    write(out / "loja_theta025.csv", 0.25)
