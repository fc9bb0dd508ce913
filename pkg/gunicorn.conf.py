bind = "0.0.0.0:5000"
workers = 1
threads = 4
# Scans over large families can take minutes
timeout = 600
