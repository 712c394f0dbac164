"""
Benchmark families, benchmark modes and the places a task embedding can
enter the transformer.
"""
from enum import Enum


class Family(Enum):
    """
    The Family enumeration is the benchmark families tamlab generates.

    - classification: integer sequence to one of C classes.
    - transduction: integer sequence to integer sequence.
    - pathfinding: obstacle cells to the shortest start-end path.
    """
    classification = 'classification'
    transduction = 'transduction'
    pathfinding = 'pathfinding'

    @staticmethod
    def is_sequence_output(family):
        """True when examples of ``family`` have a token-sequence target."""
        return Family(family) is not Family.classification


class Mode(Enum):
    """Plain benchmarks or compositional ones with unseen primitives."""
    plain = 'plain'
    comp = 'comp'


class Conditioning(Enum):
    """
    Where the task embedding conditions the network.

    - input_token: z is an extra input embedding.
    - adapter: z holds the weights of bottleneck adapters.
    - layer_norm: z holds the scales and biases of every layer norm.
    """
    input_token = 'input-token'
    adapter = 'adapter'
    layer_norm = 'layer-norm'
