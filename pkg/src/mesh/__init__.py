# Mesh Generator Module
