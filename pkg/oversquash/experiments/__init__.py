from . import report, signal, transfer
