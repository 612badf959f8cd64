import os

# design_types_info = {
#     "design_2d": DesignType(
#         name="2D flip-flop",
#         design_description="...",
#         args={"b": "..."}
#     )
# }
design_types_info = {}
design_types_modules = {}

num_threads = int(os.environ.get("ESNENA_NUM_THREADS", os.cpu_count() or 1))
