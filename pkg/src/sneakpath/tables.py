"""Published reference code designs for 128x128 arrays."""
from dataclasses import dataclass


@dataclass(frozen=True)
class ReferenceCode:
    name: str
    k_sf: int
    rate: float
    lam: float
    dc: int
    degrees: dict
    sigma_th: float
    sigma_star: float
    n: int = 128


TABLE1 = {
    "table1-row1": ReferenceCode("table1-row1", 2, 0.5, 0.5338, 6, {3: 0.3561, 10: 0.4165, 36: 0.2274}, 65, 66),
    "table1-row2": ReferenceCode("table1-row2", 5, 0.5, 0.8306, 6, {3: 0.3704, 10: 0.3560, 36: 0.2736}, 50, 52),
    "table1-row3": ReferenceCode("table1-row3", 1, 0.8, 0.3398, 16, {3: 0.6540, 10: 0.3100, 36: 0.0360}, 37, 39),
    "table1-row4": ReferenceCode("table1-row4", 2, 0.8, 0.5338, 16, {3: 0.6878, 10: 0.1670, 36: 0.1452}, 33, 35),
}
