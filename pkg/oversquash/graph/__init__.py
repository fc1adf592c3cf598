from . import core, diffusion, io, topologies
