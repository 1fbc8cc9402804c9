# Lagrangian bulk solver
