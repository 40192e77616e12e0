# Simulation modules
