"""Reference values frozen from the mpmath oracle in ``oracles/derive_constants.py``."""
import math

# cut-off constant for the quintic smoothstep
C_SMOOTHSTEP = 6.1646128230418835775
# constant-1 test double: closed form 3 pi / 4
C_CONSTANT = 3.0 * math.pi / 4.0
# continuum energies of the shrinking family
FAMILY_ENERGY = {
    0.05: 3.1491433209916359514,
    0.1: 3.1717131518076763682,
    0.2: 3.2607848030386260087,
}
