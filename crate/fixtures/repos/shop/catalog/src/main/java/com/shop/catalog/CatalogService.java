package com.shop.catalog;

public class CatalogService {
    private final ProductRepository products = new ProductRepository();

    public String describe(String sku) {
        Product p = products.find(sku);
        return p == null ? "unknown product" : p.getTitle();
    }
}
