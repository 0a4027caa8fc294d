# Turning-point FEM on graded meshes
