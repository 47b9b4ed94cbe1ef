import importlib.util
import sys

sys.dont_write_bytecode = True

spec = importlib.util.spec_from_file_location("candidate", sys.argv[1])
candidate = importlib.util.module_from_spec(spec)
spec.loader.exec_module(candidate)
f = candidate.is_palindrome
assert f("A man, a plan, a canal: Panama")
assert not f("hello")
assert f("")
assert f("No lemon, no melon")
