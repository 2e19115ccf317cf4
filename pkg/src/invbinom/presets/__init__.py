"""
Experiment presets, one TOML file each.
"""
