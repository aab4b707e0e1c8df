import os
import sys
from dataclasses import asdict

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))
from bellcheck.config.settings import settings

for key, value in asdict(settings).items():
    print(f"{key}=", repr(value))
