"""Text-driven editing of room-scale triangle-mesh scenes.

Pipeline: parse the instruction, synthesize or fetch the object, ground the
anchor object in the scene, scale the object relative to it, search the
support surface for the best free spot, refine the yaw against a signed
distance field of the scene, and fuse the meshes. Deletion, replacement,
translation, rotation and iterative insertion build on the same parts.
"""

__version__ = "0.1.0"
