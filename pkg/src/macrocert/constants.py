"""Physical constants used by the scenario arithmetic."""

# mass of one water molecule, 18 g/mol divided by Avogadro, rounded to the value used in reports
WATER_MOLECULE_MASS_KG = 2.99e-26

# IAU nominal Earth mass
EARTH_MASS_KG = 5.972e24

# exact since the 2019 SI redefinition
AVOGADRO = 6.02214076e23

MICROGRAM_KG = 1e-9
MICROMETRE_M = 1e-6
