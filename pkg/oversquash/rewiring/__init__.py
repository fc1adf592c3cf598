from . import rewire
