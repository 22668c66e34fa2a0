"""CG-SENSE reconstruction entry point.

Usage:
    python cgsense.py simulate --output-dir exp/sim --seed 0
    python cgsense.py recon exp/sim/simulated.h5 --config configs/recon/default.yaml
    python cgsense.py compare exp/latest/R1_final.h5 exp/sim/simulated_truth.h5
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
