# 标记 tests 目录为包，允许 tests 内使用相对导入（例如：from .utils import ...）