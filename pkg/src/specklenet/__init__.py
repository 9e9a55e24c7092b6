"""Imaging through thin scattering diffusers, end to end.

Subpackages:
    optics    -- Fourier-optics engine (fields, diffusers, speckle formation)
    datagen   -- object sprites, dataset construction, preprocessing, file formats
    nn        -- differentiable layer core with hand-written backward passes
    model     -- dense-block encoder-decoder assembly, training, checkpoints
    analysis  -- JI/PCC metrics, speckle correlation studies, report emission
    cli       -- one executable tying the pipeline together
"""

__version__ = "0.1.0"
