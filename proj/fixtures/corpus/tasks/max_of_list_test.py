import importlib.util
import sys

sys.dont_write_bytecode = True

spec = importlib.util.spec_from_file_location("candidate", sys.argv[1])
candidate = importlib.util.module_from_spec(spec)
spec.loader.exec_module(candidate)
f = candidate.max_of_list
assert f([3, 1, 4, 1, 5, 9, 2, 6]) == 9
assert f([-5, -2, -9]) == -2
assert f([7]) == 7
