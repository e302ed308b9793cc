"""Build hook for the optional compiled scanner.

The package is fully functional without compilation; the compiled module is a
drop-in accelerator picked up at import time.  Set CONVSQL_PURE=1 to skip the
extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CONVSQL_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("convsql._scanner", ["src/convsql/_scanner.pyx"])],
            compiler_directives={"language_level": "3str"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
