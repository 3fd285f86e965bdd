from setuptools import find_packages, setup

setup(
    name="earsim",
    version="0.1.0",
    description="Simulated binaural ear with attention, served to cognitive architectures",
    packages=find_packages(include=["earsim", "earsim.*"]),
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "scikit-learn>=1.3.0",
        "langgraph>=0.2.0",
        "fastapi>=0.115.0",
        "uvicorn[standard]>=0.32.0",
        "python-dotenv>=1.0.0",
        "pydantic>=2.9.0",
        "httpx>=0.25.0",
    ],
    extras_require={"test": ["pytest>=8.0.0", "hypothesis>=6.100.0"]},
    entry_points={"console_scripts": ["earsim=earsim.cli:main"]},
)
