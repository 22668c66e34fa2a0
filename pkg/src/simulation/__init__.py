from src.simulation.acquisition import (
    SimulatedAcquisition,
    band_limit,
    direct_dft,
    simulate_acquisition,
)
from src.simulation.phantom import (
    Ellipse,
    PhantomSpec,
    make_coil_maps,
    make_phantom,
    shepp_logan_spec,
)
from src.simulation.trajectory import make_radial_trajectory, make_spiral_trajectory
