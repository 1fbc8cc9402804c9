# Characteristic ODEs and trajectory utilities
