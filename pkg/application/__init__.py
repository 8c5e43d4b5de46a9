# Command-line application: runs, configs and trajectory files
