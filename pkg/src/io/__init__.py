"""
파일 입출력 모듈
JSON 넷리스트, STL 메쉬, 툴패스
"""

from .netlist import export_netlist, import_netlist
from .mesh_export import export_mesh
from .toolpath_export import export_toolpath

__all__ = [
    'export_netlist',
    'import_netlist',
    'export_mesh',
    'export_toolpath',
]
