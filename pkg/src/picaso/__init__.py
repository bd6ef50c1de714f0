"""Cycle-level simulator of the PiCaSO bit-serial PIM overlay and analytical
models comparing it with custom compute-in-BRAM designs."""

from .datapath import AluOp, EncoderConf, OpMuxConf, PeBlockState
from .machine import OperandLayout, PimArray
from .microprogram import (
    ControlWord, Microprogram, PipelineConfig, prog_accumulate_row, prog_addsub,
    prog_mult_booth, schedule_for,
)

__version__ = "0.1.0"
