# Newtonian kernel and effective potentials
