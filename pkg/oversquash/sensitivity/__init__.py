from . import bounds, mpnn, obstruction
