"""
A battery of sub-samples
========================

Run the same test on several filtered views of the data (regions,
sectors, snapshot years) and lay the results out in a wide table, one
line per view with unweighted and weighted blocks side by side.
"""

import sys

from keiretsunet.stats import parse_battery, test_battery, write_wide
from keiretsunet.synth import PlantSpec, generate

records, memberships = generate(PlantSpec(seed=5))

battery = parse_battery(
    """label,macroarea,sector_codes,snapshot_year,weighting
Overall,,,,both
1985,,,1985,both
ASEAN,ASEAN,,,both
Europe,EU,,,both
Electrical,,1700,,both
"""
)
rows = test_battery(records, memberships, battery, runs=20, mc_samples=999, seed=5)
write_wide(rows, sys.stdout)
