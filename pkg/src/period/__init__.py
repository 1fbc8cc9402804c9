# Period function, turning points and near-minimum expansions
