"""Storage module for frame trees and report files."""
from .exporters import (
    read_csv,
    read_map_csv,
    read_png_text,
    write_csv,
    write_heatmap,
    write_line_plot,
    write_map_csv,
)
from .local_storage import FrameStore, load_activity_map, read_json, save_activity_map, write_json

__all__ = [
    'read_csv',
    'read_map_csv',
    'read_png_text',
    'write_csv',
    'write_heatmap',
    'write_line_plot',
    'write_map_csv',
    'FrameStore',
    'load_activity_map',
    'save_activity_map',
    'read_json',
    'write_json',
]
