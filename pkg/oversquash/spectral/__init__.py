from . import eigen, metrics, walks
